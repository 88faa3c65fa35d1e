#include "stockcnn/experiment/figures.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace stockcnn::experiment {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fixed(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string shortest(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
void push_unique(std::vector<T>& items, const T& v)
{
    if (std::find(items.begin(), items.end(), v) == items.end()) items.push_back(v);
}

struct Plot {
    double left, top, width, height;
    double y(double accuracy) const { return top + (1.0 - accuracy) * height; }
};

void axes(std::ostringstream& out, const Plot& p, const std::string& title, const std::string& xlabel)
{
    out << "<text x=\"" << fixed(p.left + p.width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-size=\"16\">" << title << "</text>\n";
    for (int k = 0; k <= 4; ++k) {
        const double a = k * 0.25;
        const std::string y = fixed(p.y(a));
        out << "<line x1=\"" << fixed(p.left) << "\" y1=\"" << y << "\" x2=\"" << fixed(p.left + p.width)
            << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fixed(p.left - 6) << "\" y=\"" << y << "\" text-anchor=\"end\" "
            << "dominant-baseline=\"middle\" font-size=\"11\">" << fixed(a) << "</text>\n";
    }
    out << "<line x1=\"" << fixed(p.left) << "\" y1=\"" << fixed(p.top) << "\" x2=\"" << fixed(p.left)
        << "\" y2=\"" << fixed(p.top + p.height) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fixed(p.left) << "\" y1=\"" << fixed(p.top + p.height) << "\" x2=\""
        << fixed(p.left + p.width) << "\" y2=\"" << fixed(p.top + p.height) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(p.left + p.width / 2) << "\" y=\"" << fixed(p.top + p.height + 40)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << fixed(p.top + p.height / 2) << "\" text-anchor=\"middle\" "
        << "font-size=\"12\" transform=\"rotate(-90 16 " << fixed(p.top + p.height / 2)
        << ")\">accuracy</text>\n";
}

void legend(std::ostringstream& out, double x, double y, const std::vector<std::string>& names)
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double row = y + static_cast<double>(i) * 18.0;
        out << "<rect x=\"" << fixed(x) << "\" y=\"" << fixed(row - 5) << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[i % 5] << "\"/>\n";
        out << "<text x=\"" << fixed(x + 16) << "\" y=\"" << fixed(row) << "\" dominant-baseline=\"middle\" "
            << "font-size=\"11\">" << names[i] << "</text>\n";
    }
}

std::string header(double width, double height)
{
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\""
        << fixed(height) << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out.str();
}

} // namespace

std::string accuracy_vs_horizon_svg(const std::vector<ResultRow>& rows)
{
    dataset::SplitStrategy split = dataset::SplitStrategy::Time;
    const bool has_time = std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) {
        return r.strategy == dataset::SplitStrategy::Time;
    });
    if (!has_time && !rows.empty()) split = rows.front().strategy;

    std::vector<int> horizons;
    std::vector<imaging::Variant> variants;
    for (const ResultRow& r : rows) {
        if (r.strategy != split) continue;
        push_unique(horizons, r.horizon);
        push_unique(variants, r.variant);
    }
    std::sort(horizons.begin(), horizons.end());

    const Plot plot{60.0, 40.0, 440.0, 300.0};
    std::ostringstream out;
    out << header(680.0, 400.0);
    axes(out, plot, "Accuracy vs horizon (" + std::string(dataset::to_string(split)) + " split)",
         "horizon (trading days)");

    const auto x_of = [&](int horizon) {
        const auto k = static_cast<double>(std::find(horizons.begin(), horizons.end(), horizon) - horizons.begin());
        return plot.left + (k + 0.5) * plot.width / static_cast<double>(std::max<std::size_t>(1, horizons.size()));
    };
    for (int h : horizons) {
        out << "<text x=\"" << fixed(x_of(h)) << "\" y=\"" << fixed(plot.top + plot.height + 16)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << h << "</text>\n";
    }

    std::vector<std::string> names;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        names.emplace_back(imaging::to_string(variants[vi]));
        std::vector<const ResultRow*> points;
        for (const ResultRow& r : rows) {
            if (r.strategy == split && r.variant == variants[vi] && r.ok()) points.push_back(&r);
        }
        std::sort(points.begin(), points.end(),
                  [](const ResultRow* a, const ResultRow* b) { return a->horizon < b->horizon; });
        const char* colour = kPalette[vi % 5];
        if (points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
            for (std::size_t k = 0; k < points.size(); ++k) {
                out << (k ? " " : "") << fixed(x_of(points[k]->horizon)) << ',' << fixed(plot.y(points[k]->accuracy()));
            }
            out << "\"/>\n";
        }
        for (const ResultRow* r : points) {
            out << "<circle cx=\"" << fixed(x_of(r->horizon)) << "\" cy=\"" << fixed(plot.y(r->accuracy()))
                << "\" r=\"3.5\" fill=\"" << colour << "\" data-variant=\"" << imaging::to_string(r->variant)
                << "\" data-horizon=\"" << r->horizon << "\" data-accuracy=\"" << shortest(r->accuracy())
                << "\"/>\n";
        }
    }
    legend(out, plot.left + plot.width + 20, plot.top + 10, names);
    out << "</svg>\n";
    return out.str();
}

std::string split_comparison_svg(const std::vector<ResultRow>& rows)
{
    std::vector<std::pair<imaging::Variant, int>> groups;
    std::vector<dataset::SplitStrategy> splits;
    for (const ResultRow& r : rows) {
        push_unique(groups, std::make_pair(r.variant, r.horizon));
        push_unique(splits, r.strategy);
    }

    const double bar = 16.0;
    const double group_width = static_cast<double>(splits.size()) * bar + 24.0;
    const Plot plot{60.0, 40.0, std::max(200.0, static_cast<double>(groups.size()) * group_width), 300.0};
    std::ostringstream out;
    out << header(plot.left + plot.width + 180.0, 420.0);
    axes(out, plot, "Accuracy by split strategy", "variant / horizon");

    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double gx = plot.left + static_cast<double>(g) * group_width + 12.0;
        out << "<text x=\"" << fixed(gx + (group_width - 24.0) / 2) << "\" y=\""
            << fixed(plot.top + plot.height + 16) << "\" text-anchor=\"middle\" font-size=\"9\">"
            << imaging::to_string(groups[g].first) << " h" << groups[g].second << "</text>\n";
        for (std::size_t s = 0; s < splits.size(); ++s) {
            const auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
                return r.variant == groups[g].first && r.horizon == groups[g].second && r.strategy == splits[s];
            });
            if (it == rows.end() || !it->ok()) continue;
            const double top = plot.y(it->accuracy());
            out << "<rect x=\"" << fixed(gx + static_cast<double>(s) * bar) << "\" y=\"" << fixed(top)
                << "\" width=\"" << fixed(bar - 2) << "\" height=\"" << fixed(plot.top + plot.height - top)
                << "\" fill=\"" << kPalette[s % 5] << "\" data-split=\"" << dataset::to_string(splits[s])
                << "\" data-variant=\"" << imaging::to_string(it->variant) << "\" data-horizon=\""
                << it->horizon << "\" data-accuracy=\"" << shortest(it->accuracy()) << "\"/>\n";
        }
    }
    std::vector<std::string> names;
    for (auto s : splits) names.emplace_back(dataset::to_string(s));
    legend(out, plot.left + plot.width + 20, plot.top + 10, names);
    out << "</svg>\n";
    return out.str();
}

} // namespace stockcnn::experiment
