#include "stockcnn/market_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "stockcnn/error.hpp"

namespace stockcnn::market_data {

namespace {

std::string_view trim_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool parse_price(std::string_view field, double& out)
{
    if (field.empty()) return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size() && std::isfinite(out);
}

bool parse_volume(std::string_view field, std::uint64_t& out)
{
    if (field.empty() || field.front() == '-' || field.front() == '+') return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

[[noreturn]] void malformed(std::size_t line, const std::string& why)
{
    throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": " + why,
                static_cast<std::int64_t>(line));
}

Bar parse_row(std::string_view row, std::size_t line_no)
{
    std::array<std::string_view, 7> fields;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = row.find(',', pos);
        if (count == fields.size()) malformed(line_no, "too many fields");
        fields[count++] = row.substr(pos, comma == std::string_view::npos ? row.npos : comma - pos);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (count != fields.size()) malformed(line_no, "expected 7 fields");

    Bar bar;
    const auto date = parse_date(fields[0]);
    if (!date) malformed(line_no, "bad date '" + std::string(fields[0]) + "'");
    bar.date = *date;
    if (!parse_price(fields[1], bar.open)) malformed(line_no, "bad Open");
    if (!parse_price(fields[2], bar.high)) malformed(line_no, "bad High");
    if (!parse_price(fields[3], bar.low)) malformed(line_no, "bad Low");
    if (!parse_price(fields[4], bar.close)) malformed(line_no, "bad Close");
    if (!fields[5].empty() && fields[5] != "null") {
        double adj = 0.0;
        if (!parse_price(fields[5], adj)) malformed(line_no, "bad Adj Close");
        bar.adj_close = adj;
    }
    if (!parse_volume(fields[6], bar.volume)) malformed(line_no, "bad Volume");
    return bar;
}

void append_number(std::string& out, double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

} // namespace

std::vector<double> Series::closes() const
{
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& bar : bars) out.push_back(bar.close);
    return out;
}

Series parse_csv(std::string_view text, std::string ticker)
{
    if (text.empty()) throw Error(ErrorKind::EmptyInput, "no input");

    Series series{std::move(ticker), {}};
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line =
            trim_cr(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;

        if (!header_seen) {
            if (line != kCsvHeader) malformed(line_no, "unexpected header");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        Bar bar = parse_row(line, line_no);
        if (!series.bars.empty() && bar.date <= series.bars.back().date) {
            throw Error(ErrorKind::NonMonotonicDates,
                        "line " + std::to_string(line_no) + ": date " + format_date(bar.date) +
                            " not after " + format_date(series.bars.back().date),
                        static_cast<std::int64_t>(line_no));
        }
        series.bars.push_back(bar);
    }
    if (series.bars.empty()) throw Error(ErrorKind::EmptyInput, "no data rows");
    return series;
}

std::string serialize_csv(const Series& series)
{
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& bar : series.bars) {
        out += format_date(bar.date);
        for (double v : {bar.open, bar.high, bar.low, bar.close}) {
            out += ',';
            append_number(out, v);
        }
        out += ',';
        if (bar.adj_close) append_number(out, *bar.adj_close);
        out += ',';
        out += std::to_string(bar.volume);
        out += '\n';
    }
    return out;
}

std::vector<Violation> validate(const Series& series)
{
    std::vector<Violation> out;
    for (std::size_t i = 0; i < series.bars.size(); ++i) {
        const Bar& b = series.bars[i];
        const bool positive = b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0 &&
                              (!b.adj_close || *b.adj_close > 0);
        if (!positive) out.push_back({i, std::string(rules::kPositivePrices)});
        if (!(b.high >= std::max(b.open, b.close))) out.push_back({i, std::string(rules::kHighAboveBody)});
        if (!(b.low <= std::min(b.open, b.close))) out.push_back({i, std::string(rules::kLowBelowBody)});
        if (!(b.high >= b.low)) out.push_back({i, std::string(rules::kHighAboveLow)});
    }
    return out;
}

Series load_csv(const std::filesystem::path& path, std::string ticker)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), std::move(ticker));
}

Series fetch_remote(const std::string& ticker, const Date& start, const Date& end,
                    const std::string& endpoint)
{
    // Split "scheme://host[:port]/path" into client base and request path.
    const std::size_t scheme_end = endpoint.find("://");
    const std::size_t path_start =
        endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string base = endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    const httplib::Params params{
        {"symbol", ticker}, {"start", format_date(start)}, {"end", format_date(end)}};
    auto result = client.Get(path, params, httplib::Headers{});
    if (!result) {
        throw Error(ErrorKind::NetworkError,
                    endpoint + ": " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw Error(ErrorKind::HttpStatus,
                    "GET " + endpoint + " for " + ticker + " returned " +
                        std::to_string(result->status),
                    result->status);
    }

    Series series = parse_csv(result->body, ticker);
    std::erase_if(series.bars, [&](const Bar& b) { return b.date < start || b.date > end; });
    if (series.bars.empty()) {
        throw Error(ErrorKind::EmptyInput, ticker + ": no bars in [" + format_date(start) + ", " +
                                               format_date(end) + "]");
    }
    return series;
}

} // namespace stockcnn::market_data
