#include "stockcnn/experiment/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "stockcnn/error.hpp"

namespace stockcnn::experiment {

namespace {

std::string shortest(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t tab = line.find('\t', pos);
        out.push_back(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
    }
    return out;
}

template <typename Num>
Num parse_num(std::string_view s, std::size_t line)
{
    Num v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorKind::MalformedRow, "results line " + std::to_string(line) + ": bad number '" +
                                                 std::string(s) + "'",
                    static_cast<std::int64_t>(line));
    }
    return v;
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
    }
    return out;
}

} // namespace

std::string results_to_tsv(const std::vector<ResultRow>& rows)
{
    std::ostringstream out;
    out << kResultColumns << '\n';
    for (const ResultRow& r : rows) {
        out << dataset::to_string(r.strategy) << '\t' << imaging::to_string(r.variant) << '\t' << r.horizon;
        if (r.ok()) {
            const auto& c = r.confusion;
            out << '\t' << c.tp << '\t' << c.fp << '\t' << c.tn << '\t' << c.fn << '\t'
                << shortest(r.sensitivity()) << '\t' << shortest(r.specificity()) << '\t'
                << shortest(r.accuracy()) << '\t' << shortest(r.mcc());
        } else {
            for (int i = 0; i < 8; ++i) out << "\tNA";
        }
        out << '\t' << r.n_train << '\t' << r.n_test << '\t' << r.status << '\n';
    }
    return out.str();
}

std::vector<ResultRow> parse_results_tsv(std::string_view text)
{
    const auto lines = lines_of(text);
    if (lines.empty() || lines.front() != kResultColumns) {
        throw Error(ErrorKind::MalformedRow, "results table header mismatch", 1);
    }
    std::vector<ResultRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::size_t line_no = i + 1;
        const auto f = split_tabs(lines[i]);
        if (f.size() != 14) {
            throw Error(ErrorKind::MalformedRow, "results line " + std::to_string(line_no) + ": expected 14 fields",
                        static_cast<std::int64_t>(line_no));
        }
        ResultRow r;
        const auto strategy = dataset::parse_split(f[0]);
        const auto variant = imaging::parse_variant(f[1]);
        if (!strategy || !variant) {
            throw Error(ErrorKind::MalformedRow, "results line " + std::to_string(line_no) + ": bad cell key",
                        static_cast<std::int64_t>(line_no));
        }
        r.strategy = *strategy;
        r.variant = *variant;
        r.horizon = parse_num<int>(f[2], line_no);
        r.status = std::string(f[13]);
        if (r.ok()) {
            r.confusion = {parse_num<std::uint64_t>(f[3], line_no), parse_num<std::uint64_t>(f[4], line_no),
                           parse_num<std::uint64_t>(f[5], line_no), parse_num<std::uint64_t>(f[6], line_no)};
        }
        r.n_train = parse_num<std::size_t>(f[11], line_no);
        r.n_test = parse_num<std::size_t>(f[12], line_no);
        rows.push_back(std::move(r));
    }
    return rows;
}

bool metrics_consistent(std::string_view tsv, double tolerance)
{
    const auto lines = lines_of(tsv);
    const auto rows = parse_results_tsv(tsv);
    std::size_t row = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const ResultRow& r = rows[row++];
        if (!r.ok()) continue;
        const auto f = split_tabs(lines[i]);
        const double stored[4] = {parse_num<double>(f[7], i + 1), parse_num<double>(f[8], i + 1),
                                  parse_num<double>(f[9], i + 1), parse_num<double>(f[10], i + 1)};
        const double recomputed[4] = {r.sensitivity(), r.specificity(), r.accuracy(), r.mcc()};
        for (int k = 0; k < 4; ++k) {
            if (std::abs(stored[k] - recomputed[k]) > tolerance) return false;
        }
    }
    return true;
}

std::string report_text(const std::vector<ResultRow>& rows, const Provenance& provenance)
{
    std::ostringstream out;
    out << "stockcnn experiment report\n";
    out << "config_hash: " << provenance.config_hash << '\n';
    out << "seed: " << provenance.seed << '\n';
    out << "code_version: " << provenance.code_version << '\n';

    bool leaky = false;
    bool timed = false;
    for (const ResultRow& r : rows) {
        leaky |= r.strategy != dataset::SplitStrategy::Time;
        timed |= r.strategy == dataset::SplitStrategy::Time;
    }
    if (leaky) out << '\n' << kLeakageWarning << '\n';
    if (timed) out << '\n' << kLookaheadNote << '\n';

    out << "\ncells:\n";
    for (const ResultRow& r : rows) {
        out << "  " << dataset::to_string(r.strategy) << ' ' << imaging::to_string(r.variant) << " h="
            << r.horizon << ": ";
        if (r.ok()) {
            out << "accuracy " << shortest(r.accuracy()) << ", mcc " << shortest(r.mcc()) << " (train "
                << r.n_train << ", test " << r.n_test << ")";
        } else {
            out << r.status;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace stockcnn::experiment
