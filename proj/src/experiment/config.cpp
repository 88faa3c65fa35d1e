#include "stockcnn/experiment/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "stockcnn/error.hpp"
#include "stockcnn/io.hpp"

namespace stockcnn::experiment {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value)
{
    std::vector<std::string_view> items;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const std::size_t comma = value.find(',', pos);
        const auto item = trim(value.substr(pos, comma == std::string_view::npos ? value.npos : comma - pos));
        if (!item.empty()) items.push_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return items;
}

[[noreturn]] void bad(std::size_t line, std::string_view key, const std::string& why)
{
    throw Error(ErrorKind::Config,
                "line " + std::to_string(line) + " (" + std::string(key) + "): " + why,
                static_cast<std::int64_t>(line));
}

template <typename Num>
Num number(std::string_view v, std::size_t line, std::string_view key)
{
    Num out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad(line, key, "not a number: " + std::string(v));
    return out;
}

Date date(std::string_view v, std::size_t line, std::string_view key)
{
    const auto d = parse_date(v);
    if (!d) bad(line, key, "expected YYYY-MM-DD, got " + std::string(v));
    return *d;
}

bool boolean(std::string_view v, std::size_t line, std::string_view key)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(line, key, "expected true/false");
}

std::string shortest(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += fmt(items[i]);
    }
    return out;
}

} // namespace

ExperimentConfig parse_config(std::string_view text)
{
    ExperimentConfig c;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) bad(line_no, line, "expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));

        if (key == "data_dir") {
            c.data_dir = std::string(value);
        } else if (key == "endpoint") {
            c.endpoint = std::string(value);
        } else if (key == "tickers") {
            c.tickers.clear();
            for (auto t : split_list(value)) c.tickers.emplace_back(t);
        } else if (key == "train_start") {
            c.train_start = date(value, line_no, key);
        } else if (key == "train_end") {
            c.train_end = date(value, line_no, key);
        } else if (key == "test_start") {
            c.test_start = date(value, line_no, key);
        } else if (key == "test_end") {
            c.test_end = date(value, line_no, key);
        } else if (key == "cutoff") {
            c.cutoff = date(value, line_no, key);
        } else if (key == "horizons") {
            c.horizons.clear();
            for (auto h : split_list(value)) c.horizons.push_back(number<int>(h, line_no, key));
        } else if (key == "variants") {
            c.variants.clear();
            for (auto v : split_list(value)) {
                const auto variant = imaging::parse_variant(v);
                if (!variant) bad(line_no, key, "unknown variant " + std::string(v));
                c.variants.push_back(*variant);
            }
        } else if (key == "split" || key == "splits") {
            c.splits.clear();
            for (auto s : split_list(value)) {
                const auto split = dataset::parse_split(s);
                if (!split) bad(line_no, key, "unknown split " + std::string(s));
                c.splits.push_back(*split);
            }
        } else if (key == "test_ratio") {
            c.test_ratio = number<double>(value, line_no, key);
        } else if (key == "train_ratio") {
            c.train_ratio = number<double>(value, line_no, key);
        } else if (key == "seed") {
            c.seed = number<std::uint64_t>(value, line_no, key);
        } else if (key == "batch_size") {
            c.train.batch_size = number<std::size_t>(value, line_no, key);
        } else if (key == "epochs") {
            c.train.epochs = number<std::size_t>(value, line_no, key);
        } else if (key == "learning_rate") {
            c.train.learning_rate = number<double>(value, line_no, key);
        } else if (key == "optimizer") {
            const auto o = nn::parse_optimizer(value);
            if (!o) bad(line_no, key, "expected sgd or adam");
            c.train.optimizer = *o;
        } else if (key == "dropout") {
            c.train.dropout = boolean(value, line_no, key);
        } else if (key == "threads") {
            c.train.threads = number<std::size_t>(value, line_no, key);
        } else if (key == "target_accuracy") {
            c.train.target_accuracy = number<double>(value, line_no, key);
        } else if (key == "width") {
            c.width = number<int>(value, line_no, key);
        } else if (key == "height") {
            c.height = number<int>(value, line_no, key);
        } else if (key == "out_dir") {
            c.out_dir = std::string(value);
        } else if (key == "force") {
            c.force = boolean(value, line_no, key);
        } else {
            bad(line_no, key, "unknown key");
        }
    }
    c.train.seed = c.seed;
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }
    ExperimentConfig c = parse_config(text);
    const auto base = path.parent_path();
    if (c.data_dir.is_relative()) c.data_dir = base / c.data_dir;
    if (c.out_dir.is_relative()) c.out_dir = base / c.out_dir;
    return c;
}

void check_config(const ExperimentConfig& c)
{
    const auto fail = [](const std::string& why) { throw Error(ErrorKind::Config, why); };
    if (!(c.train_start < c.train_end && c.train_end < c.test_end)) {
        fail("dates must satisfy train_start < train_end < test_end");
    }
    if (c.test_start > c.test_end) fail("test_start after test_end");
    if (c.horizons.empty()) fail("no horizons");
    for (int h : c.horizons) {
        if (std::find(dataset::kHorizons.begin(), dataset::kHorizons.end(), h) == dataset::kHorizons.end()) {
            fail("horizon " + std::to_string(h) + " not in {1,20,30,60,90}");
        }
    }
    if (c.variants.empty()) fail("no variants");
    if (c.splits.empty()) fail("no split strategy");
    if (!(c.test_ratio > 0.0 && c.test_ratio < 1.0)) fail("test_ratio must lie in (0,1)");
    if (!(c.train_ratio > 0.0 && c.train_ratio < 1.0)) fail("train_ratio must lie in (0,1)");
    if (c.width <= 0 || c.height <= 0 || c.width % 16 || c.height % 16) {
        fail("width and height must be positive multiples of 16");
    }
    try {
        nn::check_config(c.train);
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

std::string to_text(const ExperimentConfig& c)
{
    std::ostringstream out;
    out << "data_dir = " << c.data_dir.generic_string() << '\n';
    out << "endpoint = " << c.endpoint << '\n';
    out << "tickers = " << join(c.tickers, [](const std::string& t) { return t; }) << '\n';
    out << "train_start = " << format_date(c.train_start) << '\n';
    out << "train_end = " << format_date(c.train_end) << '\n';
    out << "test_start = " << format_date(c.test_start) << '\n';
    out << "test_end = " << format_date(c.test_end) << '\n';
    if (c.cutoff) out << "cutoff = " << format_date(*c.cutoff) << '\n';
    out << "horizons = " << join(c.horizons, [](int h) { return std::to_string(h); }) << '\n';
    out << "variants = "
        << join(c.variants, [](imaging::Variant v) { return std::string(imaging::to_string(v)); }) << '\n';
    out << "split = "
        << join(c.splits, [](dataset::SplitStrategy s) { return std::string(dataset::to_string(s)); })
        << '\n';
    out << "test_ratio = " << shortest(c.test_ratio) << '\n';
    out << "train_ratio = " << shortest(c.train_ratio) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "batch_size = " << c.train.batch_size << '\n';
    out << "epochs = " << c.train.epochs << '\n';
    out << "learning_rate = " << shortest(c.train.learning_rate) << '\n';
    out << "optimizer = " << nn::to_string(c.train.optimizer) << '\n';
    out << "dropout = " << (c.train.dropout ? "true" : "false") << '\n';
    out << "threads = " << c.train.threads << '\n';
    if (c.train.target_accuracy) out << "target_accuracy = " << shortest(*c.train.target_accuracy) << '\n';
    out << "width = " << c.width << '\n';
    out << "height = " << c.height << '\n';
    out << "out_dir = " << c.out_dir.generic_string() << '\n';
    out << "force = " << (c.force ? "true" : "false") << '\n';
    return out.str();
}

std::string config_hash(const ExperimentConfig& c)
{
    // Paths and the force flag do not change results.
    ExperimentConfig canonical = c;
    canonical.data_dir.clear();
    canonical.out_dir.clear();
    canonical.force = false;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_text(canonical)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace stockcnn::experiment
