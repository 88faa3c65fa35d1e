#include "stockcnn/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <zlib.h>

#include "stockcnn/error.hpp"

namespace stockcnn::imaging {

using market_data::Bar;

std::string_view to_string(Variant v) noexcept
{
    switch (v) {
    case Variant::NoVolume: return "no_volume";
    case Variant::Volume: return "volume";
    case Variant::MacdMa: return "macd_ma";
    case Variant::Gaf: return "gaf";
    case Variant::MacdVolumeLower: return "macd_volume_lower";
    }
    return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept
{
    for (Variant v : kAllVariants) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

bool needs_indicators(Variant v) noexcept
{
    return v == Variant::MacdMa || v == Variant::MacdVolumeLower;
}

Layout default_layout(Variant v)
{
    switch (v) {
    case Variant::NoVolume:
    case Variant::Gaf: return {{PanelKind::Price, 1.0}};
    case Variant::Volume: return {{PanelKind::Price, 0.75}, {PanelKind::Volume, 0.25}};
    case Variant::MacdMa:
        return {{PanelKind::Price, 0.6}, {PanelKind::Macd, 0.2}, {PanelKind::Volume, 0.2}};
    case Variant::MacdVolumeLower:
        return {{PanelKind::Price, 0.6}, {PanelKind::Volume, 0.2}, {PanelKind::Macd, 0.2}};
    }
    return {};
}

ChartStyle ChartStyle::for_variant(Variant v, int width_px, int height_px)
{
    ChartStyle style;
    style.variant = v;
    style.width_px = width_px;
    style.height_px = height_px;
    style.layout = default_layout(v);
    return style;
}

void check_style(const ChartStyle& style)
{
    if (style.width_px <= 0 || style.height_px <= 0 || style.width_px % 16 != 0 ||
        style.height_px % 16 != 0) {
        throw std::invalid_argument("chart size must be a positive multiple of 16, got " +
                                    std::to_string(style.width_px) + "x" +
                                    std::to_string(style.height_px));
    }
    double sum = 0.0;
    for (const Panel& p : style.layout) {
        if (!(p.fraction > 0.0)) throw std::invalid_argument("panel fraction must be positive");
        sum += p.fraction;
    }
    if (style.layout.empty() || std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("panel fractions must sum to 1");
    }
}

Image::Image(int w, int h, Rgb fill)
    : width(w)
    , height(h)
    , pixels(static_cast<std::size_t>(w) * h * 3)
{
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill.r;
        pixels[i + 1] = fill.g;
        pixels[i + 2] = fill.b;
    }
}

WindowIndicators slice_indicators(const indicators::Bundle& bundle, std::size_t first,
                                  std::size_t count)
{
    const auto take = [&](const indicators::IndicatorSeries& s, const char* name) {
        if (first + count > s.size()) {
            throw Error(ErrorKind::MissingIndicators, std::string(name) + ": range past series end");
        }
        std::vector<double> out;
        out.reserve(count);
        for (std::size_t i = first; i < first + count; ++i) {
            if (!s[i]) {
                throw Error(ErrorKind::MissingIndicators,
                            std::string(name) + " undefined at index " + std::to_string(i));
            }
            out.push_back(*s[i]);
        }
        return out;
    };
    return WindowIndicators{take(bundle.sma5, "sma5"),
                            take(bundle.sma10, "sma10"),
                            take(bundle.sma30, "sma30"),
                            take(bundle.macd.macd_line, "macd"),
                            take(bundle.macd.signal_line, "signal"),
                            take(bundle.macd.histogram, "histogram")};
}

std::vector<PanelRows> panel_rows(const ChartStyle& style)
{
    std::vector<PanelRows> rows;
    double cumulative = 0.0;
    int top = 0;
    for (std::size_t k = 0; k < style.layout.size(); ++k) {
        cumulative += style.layout[k].fraction;
        const int bottom = k + 1 == style.layout.size()
                               ? style.height_px
                               : static_cast<int>(std::lround(cumulative * style.height_px));
        rows.push_back({style.layout[k].kind, top, bottom});
        top = bottom;
    }
    return rows;
}

namespace {

// Linear value -> row mapping inside one panel; hi maps to the top row.
class VerticalScale {
public:
    VerticalScale(double lo, double hi, int top, int bottom)
        : lo_(lo)
        , hi_(hi)
        , top_(top)
        , bottom_(bottom)
    {
    }

    int row(double v) const noexcept
    {
        const int h = bottom_ - top_;
        if (!(hi_ > lo_)) return top_ + (h - 1) / 2;
        const double t = (hi_ - v) / (hi_ - lo_);
        const int r = top_ + static_cast<int>(std::lround(t * (h - 1)));
        return std::clamp(r, top_, bottom_ - 1);
    }

private:
    double lo_;
    double hi_;
    int top_;
    int bottom_;
};

struct Columns {
    int body_width;
    int x0(std::size_t k, int width) const noexcept
    {
        return static_cast<int>(k * static_cast<std::size_t>(width) / kWindowBars);
    }
    int centre(std::size_t k, int width) const noexcept { return x0(k, width) + (body_width - 1) / 2; }
};

Columns columns_for(int width)
{
    const int slot = width / static_cast<int>(kWindowBars);
    return Columns{slot >= 2 ? slot - 1 : 1};
}

void vline(Image& img, int x, int y0, int y1, Rgb c)
{
    if (x < 0 || x >= img.width) return;
    if (y0 > y1) std::swap(y0, y1);
    for (int y = y0; y <= y1; ++y) img.set(x, y, c);
}

// Bresenham; endpoints are already clamped to the panel.
void line(Image& img, int x0, int y0, int x1, int y1, Rgb c)
{
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (x0 >= 0 && x0 < img.width) img.set(x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void polyline(Image& img, const Columns& cols, const VerticalScale& scale,
              std::span<const double> values, Rgb c)
{
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        line(img, cols.centre(k, img.width), scale.row(values[k]), cols.centre(k + 1, img.width),
             scale.row(values[k + 1]), c);
    }
    if (values.size() == 1) img.set(cols.centre(0, img.width), scale.row(values[0]), c);
}

void draw_price_panel(Image& img, const PanelRows& rows, std::span<const Bar> window,
                      const std::optional<WindowIndicators>& ind, const ChartStyle& style)
{
    double lo = window.front().low;
    double hi = window.front().high;
    for (const Bar& b : window) {
        lo = std::min(lo, b.low);
        hi = std::max(hi, b.high);
    }
    const VerticalScale scale(lo, hi, rows.top, rows.bottom);
    const Columns cols = columns_for(img.width);

    if (ind && needs_indicators(style.variant)) {
        polyline(img, cols, scale, ind->sma30, style.sma30_color);
        polyline(img, cols, scale, ind->sma10, style.sma10_color);
        polyline(img, cols, scale, ind->sma5, style.sma5_color);
    }

    for (std::size_t k = 0; k < window.size(); ++k) {
        const Bar& b = window[k];
        const int x0 = cols.x0(k, img.width);
        const int top = scale.row(std::max(b.open, b.close));
        const int bottom = scale.row(std::min(b.open, b.close));
        const Rgb body = b.close > b.open ? style.bullish_color : style.bearish_color;
        vline(img, cols.centre(k, img.width), scale.row(b.high), scale.row(b.low), style.wick_color);
        for (int x = x0; x < x0 + cols.body_width; ++x) vline(img, x, top, bottom, body);
    }
}

void draw_volume_panel(Image& img, const PanelRows& rows, std::span<const Bar> window,
                       const ChartStyle& style)
{
    std::uint64_t vmax = 0;
    for (const Bar& b : window) vmax = std::max(vmax, b.volume);
    if (vmax == 0) return;
    const Columns cols = columns_for(img.width);
    const int h = rows.bottom - rows.top;
    for (std::size_t k = 0; k < window.size(); ++k) {
        const double frac = static_cast<double>(window[k].volume) / static_cast<double>(vmax);
        const int bar_rows = static_cast<int>(std::lround(frac * h));
        if (bar_rows == 0) continue;
        const int x0 = cols.x0(k, img.width);
        for (int x = x0; x < x0 + cols.body_width; ++x) {
            vline(img, x, rows.bottom - bar_rows, rows.bottom - 1, style.volume_color);
        }
    }
}

void draw_macd_panel(Image& img, const PanelRows& rows, const WindowIndicators& ind,
                     const ChartStyle& style)
{
    double lo = 0.0;
    double hi = 0.0;
    for (const auto* s : {&ind.macd, &ind.signal, &ind.histogram}) {
        for (double v : *s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const VerticalScale scale(lo, hi, rows.top, rows.bottom);
    const Columns cols = columns_for(img.width);
    const int zero = scale.row(0.0);
    for (std::size_t k = 0; k < ind.histogram.size(); ++k) {
        const int x0 = cols.x0(k, img.width);
        for (int x = x0; x < x0 + cols.body_width; ++x) {
            vline(img, x, zero, scale.row(ind.histogram[k]), style.histogram_color);
        }
    }
    polyline(img, cols, scale, ind.signal, style.signal_color);
    polyline(img, cols, scale, ind.macd, style.macd_color);
}

} // namespace

Image render_candles(std::span<const Bar> window, const std::optional<WindowIndicators>& indicators,
                     const ChartStyle& style)
{
    check_style(style);
    if (style.variant == Variant::Gaf) {
        throw std::invalid_argument("render_candles: GAF variant is rendered with gaf_to_image");
    }
    if (window.size() != kWindowBars) {
        throw Error(ErrorKind::WrongWindowLength,
                    "expected 60 bars, got " + std::to_string(window.size()),
                    static_cast<std::int64_t>(window.size()));
    }
    const bool wants_indicators = needs_indicators(style.variant);
    if (wants_indicators) {
        if (!indicators) throw Error(ErrorKind::MissingIndicators, "variant needs MACD/SMA values");
        for (const auto* s : {&indicators->sma5, &indicators->sma10, &indicators->sma30,
                              &indicators->macd, &indicators->signal, &indicators->histogram}) {
            if (s->size() != kWindowBars) {
                throw Error(ErrorKind::MissingIndicators, "indicator values must cover 60 bars");
            }
        }
    }

    Image img(style.width_px, style.height_px, style.background);
    for (const PanelRows& rows : panel_rows(style)) {
        switch (rows.kind) {
        case PanelKind::Price: draw_price_panel(img, rows, window, indicators, style); break;
        case PanelKind::Volume: draw_volume_panel(img, rows, window, style); break;
        case PanelKind::Macd:
            if (wants_indicators) draw_macd_panel(img, rows, *indicators, style);
            break;
        }
    }
    return img;
}

GafMatrix gaf(std::span<const double> closes)
{
    if (closes.empty()) throw std::invalid_argument("gaf: empty window");
    const auto [lo_it, hi_it] = std::minmax_element(closes.begin(), closes.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    GafMatrix g;
    g.n = closes.size();
    g.rescaled.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        g.rescaled[i] = hi > lo ? std::clamp(2.0 * (closes[i] - lo) / (hi - lo) - 1.0, -1.0, 1.0) : 0.0;
    }

    // cos(acos a + acos b) = a*b - sqrt(1-a^2)*sqrt(1-b^2); the algebraic
    // form avoids the ill-conditioned acos near +-1.
    std::vector<double> sines(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        sines[i] = std::sqrt(std::max(0.0, 1.0 - g.rescaled[i] * g.rescaled[i]));
    }
    g.entries.resize(g.n * g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = i; j < g.n; ++j) {
            const double v = g.rescaled[i] * g.rescaled[j] - sines[i] * sines[j];
            g.entries[i * g.n + j] = v;
            g.entries[j * g.n + i] = v;
        }
    }
    return g;
}

Image gaf_to_image(const GafMatrix& g, const ChartStyle& style)
{
    if (style.variant != Variant::Gaf) throw std::invalid_argument("gaf_to_image: style must be Gaf");
    if (style.width_px <= 0 || style.height_px <= 0 || g.n == 0) {
        throw std::invalid_argument("gaf_to_image: empty target or matrix");
    }
    Image img(style.width_px, style.height_px);
    for (int y = 0; y < style.height_px; ++y) {
        const std::size_t i = static_cast<std::size_t>(y) * g.n / style.height_px;
        for (int x = 0; x < style.width_px; ++x) {
            const std::size_t j = static_cast<std::size_t>(x) * g.n / style.width_px;
            const double v = std::clamp(g(i, j), -1.0, 1.0);
            const auto gray = static_cast<std::uint8_t>(std::lround((v + 1.0) * 127.5));
            img.set(x, y, {gray, gray, gray});
        }
    }
    return img;
}

Image render_window(std::span<const Bar> window, const std::optional<WindowIndicators>& indicators,
                    const ChartStyle& style)
{
    if (style.variant != Variant::Gaf) return render_candles(window, indicators, style);
    check_style(style);
    if (window.size() != kWindowBars) {
        throw Error(ErrorKind::WrongWindowLength,
                    "expected 60 bars, got " + std::to_string(window.size()),
                    static_cast<std::int64_t>(window.size()));
    }
    std::vector<double> closes;
    closes.reserve(window.size());
    for (const Bar& b : window) closes.push_back(b.close);
    return gaf_to_image(gaf(closes), style);
}

template <typename T>
Image tensor_to_image(const nn::Tensor<T>& t)
{
    if (t.shape.size() != 3 || t.shape[0] != 3) {
        throw Error(ErrorKind::ShapeMismatch, "tensor_to_image expects (3,H,W), got " +
                                                  nn::shape_string(t.shape));
    }
    Image img(static_cast<int>(t.shape[2]), static_cast<int>(t.shape[1]));
    const std::size_t plane = t.shape[1] * t.shape[2];
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double v = std::clamp(static_cast<double>(t.data[c * plane + p]), 0.0, 1.0);
            img.pixels[p * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
    }
    return img;
}

template Image tensor_to_image<float>(const nn::Tensor<float>&);
template Image tensor_to_image<double>(const nn::Tensor<double>&);

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4], std::span<const std::uint8_t> data)
{
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_pos = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + data.size()));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

} // namespace

std::vector<std::uint8_t> encode_png(const Image& img)
{
    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0}); // 8-bit, RGB, deflate, no filter, no interlace
    put_chunk(out, "IHDR", ihdr);

    const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const auto row = img.pixels.begin() + static_cast<std::ptrdiff_t>(y * stride);
        raw.insert(raw.end(), row, row + static_cast<std::ptrdiff_t>(stride));
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> packed(packed_size);
    if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw Error(ErrorKind::Io, "zlib compression failed");
    }
    packed.resize(packed_size);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", {});
    return out;
}

void write_png(const std::filesystem::path& path, const Image& img)
{
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace stockcnn::imaging
