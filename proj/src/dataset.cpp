#include "stockcnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stockcnn/error.hpp"
#include "stockcnn/indicators.hpp"
#include "stockcnn/io.hpp"
#include "stockcnn/rng.hpp"

namespace stockcnn::dataset {

using market_data::Series;

int label(const Series& series, std::size_t i, std::size_t d)
{
    if (i >= series.size() || d >= series.size() - i) {
        throw Error(ErrorKind::IndexOutOfRange,
                    "label(i=" + std::to_string(i) + ", d=" + std::to_string(d) +
                        ") on series of length " + std::to_string(series.size()));
    }
    return series.bars[i + d].close > series.bars[i].close ? 1 : 0;
}

std::size_t sample_count(std::size_t series_length, std::size_t horizon) noexcept
{
    const std::size_t needed = kWarmupBars + kWindowBars + horizon;
    return series_length < needed ? 0 : series_length - needed + 1;
}

std::vector<Sample> build_samples(const Series& series, int horizon, const imaging::ChartStyle& style)
{
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const auto d = static_cast<std::size_t>(horizon);
    const std::size_t count = sample_count(series.size(), d);
    if (count == 0) {
        throw Error(ErrorKind::SeriesTooShort,
                    series.ticker + ": " + std::to_string(series.size()) + " bars, need " +
                        std::to_string(kWarmupBars + kWindowBars + d),
                    static_cast<std::int64_t>(series.size()));
    }
    imaging::check_style(style);

    // Indicators over the whole series are causal: the value at j uses only
    // closes at or before j, so a window never sees bars past its end.
    std::optional<indicators::Bundle> bundle;
    if (imaging::needs_indicators(style.variant)) {
        const auto closes = series.closes();
        bundle = indicators::compute_bundle(closes);
    }

    std::vector<Sample> samples;
    samples.reserve(count);
    const std::size_t first_end = kWarmupBars + kWindowBars - 1;
    for (std::size_t i = first_end; i + d < series.size(); ++i) {
        const std::size_t start = i + 1 - kWindowBars;
        const std::span<const market_data::Bar> window(series.bars.data() + start, kWindowBars);
        std::optional<imaging::WindowIndicators> ind;
        if (bundle) ind = imaging::slice_indicators(*bundle, start, kWindowBars);

        Sample s;
        s.image = imaging::render_window(window, ind, style);
        s.label = label(series, i, d);
        s.ticker = series.ticker;
        s.end_index = i;
        s.end_date = series.bars[i].date;
        s.horizon = horizon;
        samples.push_back(std::move(s));
    }
    return samples;
}

std::string_view to_string(SplitStrategy s) noexcept
{
    switch (s) {
    case SplitStrategy::Random: return "random";
    case SplitStrategy::Automatic: return "automatic";
    case SplitStrategy::Time: return "time";
    }
    return "unknown";
}

std::optional<SplitStrategy> parse_split(std::string_view name) noexcept
{
    for (auto s : {SplitStrategy::Random, SplitStrategy::Automatic, SplitStrategy::Time}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

namespace {

void require_nonempty(std::size_t n)
{
    if (n == 0) throw Error(ErrorKind::EmptyInput, "cannot split an empty sample set");
}

void warn_if_degenerate(SplitResult& r)
{
    if (r.test.empty()) r.warnings.emplace_back("test partition is empty");
    if (r.train.empty()) r.warnings.emplace_back("train partition is empty");
}

} // namespace

SplitResult split_random(std::size_t n, double test_ratio, std::uint64_t seed)
{
    require_nonempty(n);
    if (!(test_ratio > 0.0 && test_ratio < 1.0)) {
        throw std::invalid_argument("test_ratio must lie in (0, 1)");
    }
    const auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    SplitResult r;
    r.strategy = SplitStrategy::Random;
    r.parameter = test_ratio;
    r.seed = seed;
    r.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    r.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(r.test.begin(), r.test.end());
    std::sort(r.train.begin(), r.train.end());
    warn_if_degenerate(r);
    return r;
}

SplitResult split_automatic(std::size_t n, double train_ratio)
{
    require_nonempty(n);
    if (!(train_ratio > 0.0 && train_ratio <= 1.0)) {
        throw std::invalid_argument("train_ratio must lie in (0, 1]");
    }
    const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n)));

    SplitResult r;
    r.strategy = SplitStrategy::Automatic;
    r.parameter = train_ratio;
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? r.train : r.test).push_back(i);
    warn_if_degenerate(r);
    return r;
}

SplitResult split_time(std::span<const Date> end_dates, const Date& cutoff)
{
    require_nonempty(end_dates.size());
    SplitResult r;
    r.strategy = SplitStrategy::Time;
    r.parameter = cutoff;
    for (std::size_t i = 0; i < end_dates.size(); ++i) {
        (end_dates[i] < cutoff ? r.train : r.test).push_back(i);
    }
    warn_if_degenerate(r);
    return r;
}

SplitResult split_time(std::span<const Sample> samples, const Date& cutoff)
{
    std::vector<Date> dates;
    dates.reserve(samples.size());
    for (const Sample& s : samples) dates.push_back(s.end_date);
    return split_time(dates, cutoff);
}

bool is_partition(const SplitResult& split, std::size_t n)
{
    if (split.train.size() + split.test.size() != n) return false;
    std::vector<char> seen(n, 0);
    for (const auto* part : {&split.train, &split.test}) {
        for (std::size_t i : *part) {
            if (i >= n || seen[i]) return false;
            seen[i] = 1;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kManifestMagic = "# stockcnn-manifest 1";
constexpr std::string_view kManifestColumns = "ticker\tend_date\tend_index\thorizon\tlabel\toffset";

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

template <typename Int>
Int parse_int(std::string_view field, std::size_t line_no)
{
    Int v{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorKind::MalformedRow, "manifest line " + std::to_string(line_no),
                    static_cast<std::int64_t>(line_no));
    }
    return v;
}

} // namespace

std::string manifest_to_string(const Manifest& manifest)
{
    std::ostringstream out;
    out << kManifestMagic << '\n';
    out << "# variant=" << imaging::to_string(manifest.variant) << " width=" << manifest.width
        << " height=" << manifest.height << " store=" << manifest.store << '\n';
    out << kManifestColumns << '\n';
    for (const ManifestRecord& r : manifest.records) {
        out << r.ticker << '\t' << format_date(r.end_date) << '\t' << r.end_index << '\t'
            << r.horizon << '\t' << r.label << '\t' << r.offset << '\n';
    }
    return out.str();
}

Manifest parse_manifest(std::string_view text)
{
    Manifest m;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool columns_seen = false;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (line_no == 1) {
            if (line != kManifestMagic) throw Error(ErrorKind::MalformedRow, "not a manifest", 1);
            continue;
        }
        if (line.front() == '#') {
            std::istringstream meta{std::string(line.substr(1))};
            std::string kv;
            while (meta >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq);
                const std::string value = kv.substr(eq + 1);
                if (key == "variant") {
                    const auto v = imaging::parse_variant(value);
                    if (!v) throw Error(ErrorKind::MalformedRow, "unknown variant " + value,
                                        static_cast<std::int64_t>(line_no));
                    m.variant = *v;
                } else if (key == "width") {
                    m.width = parse_int<int>(value, line_no);
                } else if (key == "height") {
                    m.height = parse_int<int>(value, line_no);
                } else if (key == "store") {
                    m.store = value;
                }
            }
            continue;
        }
        if (!columns_seen) {
            if (line != kManifestColumns) {
                throw Error(ErrorKind::MalformedRow, "unexpected manifest columns",
                            static_cast<std::int64_t>(line_no));
            }
            columns_seen = true;
            continue;
        }
        const auto f = split_tabs(line);
        if (f.size() != 6) {
            throw Error(ErrorKind::MalformedRow, "manifest line " + std::to_string(line_no),
                        static_cast<std::int64_t>(line_no));
        }
        ManifestRecord r;
        r.ticker = std::string(f[0]);
        const auto date = parse_date(f[1]);
        if (!date) throw Error(ErrorKind::MalformedRow, "bad date", static_cast<std::int64_t>(line_no));
        r.end_date = *date;
        r.end_index = parse_int<std::size_t>(f[2], line_no);
        r.horizon = parse_int<int>(f[3], line_no);
        r.label = parse_int<int>(f[4], line_no);
        r.offset = parse_int<std::uint64_t>(f[5], line_no);
        m.records.push_back(std::move(r));
    }
    return m;
}

void write_dataset(const std::filesystem::path& dir, const std::string& stem,
                   imaging::Variant variant, std::span<const Sample> samples)
{
    Manifest m;
    m.variant = variant;
    m.store = stem + ".bin";
    if (!samples.empty()) {
        m.width = samples.front().image.width;
        m.height = samples.front().image.height;
    }
    std::string store;
    for (const Sample& s : samples) {
        if (s.image.width != m.width || s.image.height != m.height) {
            throw std::invalid_argument("write_dataset: mixed image sizes");
        }
        m.records.push_back({s.ticker, s.end_date, s.end_index, s.horizon, s.label, store.size()});
        store.append(reinterpret_cast<const char*>(s.image.pixels.data()), s.image.pixels.size());
    }
    io::write_file_atomic(dir / m.store, store);
    io::write_file_atomic(dir / (stem + ".tsv"), manifest_to_string(m));
}

std::vector<Sample> read_dataset(const std::filesystem::path& manifest_path)
{
    const Manifest m = parse_manifest(io::read_file(manifest_path));
    const std::string store = io::read_file(manifest_path.parent_path() / m.store);
    const std::size_t bytes = static_cast<std::size_t>(m.width) * m.height * 3;

    std::vector<Sample> out;
    out.reserve(m.records.size());
    for (const ManifestRecord& r : m.records) {
        if (r.offset + bytes > store.size()) {
            throw Error(ErrorKind::Io, "image store truncated at offset " + std::to_string(r.offset));
        }
        Sample s;
        s.image = imaging::Image(m.width, m.height);
        std::copy_n(store.data() + r.offset, bytes, reinterpret_cast<char*>(s.image.pixels.data()));
        s.label = r.label;
        s.ticker = r.ticker;
        s.end_index = r.end_index;
        s.end_date = r.end_date;
        s.horizon = r.horizon;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace stockcnn::dataset
