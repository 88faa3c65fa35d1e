#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stockcnn/indicators.hpp"
#include "stockcnn/market_data.hpp"
#include "stockcnn/nn/tensor.hpp"

namespace stockcnn::imaging {

inline constexpr std::size_t kWindowBars = 60;

enum class Variant { NoVolume, Volume, MacdMa, Gaf, MacdVolumeLower };

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::NoVolume, Variant::Volume, Variant::MacdMa, Variant::Gaf, Variant::MacdVolumeLower};

std::string_view to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view name) noexcept;

/// True for the variants that draw SMA overlays and a MACD panel.
bool needs_indicators(Variant v) noexcept;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class PanelKind { Price, Volume, Macd };

struct Panel {
    PanelKind kind;
    double fraction;
};

/// Panels listed top to bottom.
using Layout = std::vector<Panel>;

Layout default_layout(Variant v);

struct ChartStyle {
    Variant variant = Variant::NoVolume;
    int width_px = 96;
    int height_px = 96;
    Rgb bullish_color{255, 0, 0};
    Rgb bearish_color{0, 192, 0};
    Rgb background{255, 255, 255};
    Rgb wick_color{64, 64, 64};
    Rgb volume_color{128, 128, 128};
    Rgb sma5_color{0, 0, 255};
    Rgb sma10_color{255, 160, 0};
    Rgb sma30_color{160, 0, 160};
    Rgb macd_color{0, 0, 255};
    Rgb signal_color{255, 160, 0};
    Rgb histogram_color{160, 160, 160};
    Layout layout = default_layout(Variant::NoVolume);

    static ChartStyle for_variant(Variant v, int width_px = 96, int height_px = 96);
};

/// Throws std::invalid_argument unless both dimensions are positive
/// multiples of 16 and the layout fractions sum to 1.
void check_style(const ChartStyle& style);

/// Row-major RGB raster.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {});

    Rgb at(int x, int y) const noexcept
    {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set(int x, int y, Rgb c) noexcept
    {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        pixels[i] = c.r;
        pixels[i + 1] = c.g;
        pixels[i + 2] = c.b;
    }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Indicator values at the 60 rendered positions; every entry defined.
struct WindowIndicators {
    std::vector<double> sma5;
    std::vector<double> sma10;
    std::vector<double> sma30;
    std::vector<double> macd;
    std::vector<double> signal;
    std::vector<double> histogram;
};

/// Slices [first, first+count) out of a full-series bundle.
/// Throws Error{MissingIndicators} if any value in the range is undefined.
WindowIndicators slice_indicators(const indicators::Bundle& bundle, std::size_t first,
                                  std::size_t count);

/// Pixel rows [top, bottom) of each panel, in layout order.
struct PanelRows {
    PanelKind kind;
    int top;
    int bottom;
};
std::vector<PanelRows> panel_rows(const ChartStyle& style);

/// Candlestick chart of exactly 60 bars, oldest on the left. No axes or
/// text; only market structure is drawn.
/// Throws Error{WrongWindowLength | MissingIndicators}.
Image render_candles(std::span<const market_data::Bar> window,
                     const std::optional<WindowIndicators>& indicators, const ChartStyle& style);

/// Gramian angular summation field of a min-max rescaled series.
struct GafMatrix {
    std::size_t n = 0;
    std::vector<double> rescaled; // x̃ in [-1, 1]
    std::vector<double> entries;  // n*n, row-major

    double operator()(std::size_t i, std::size_t j) const noexcept { return entries[i * n + j]; }
};

/// A window with max == min rescales to all zeros.
GafMatrix gaf(std::span<const double> closes);

/// [-1, 1] -> 0..255 gray, nearest-neighbour scaled to the style size.
Image gaf_to_image(const GafMatrix& g, const ChartStyle& style);

/// Dispatches on style.variant: Gaf encodes the closes, every other variant
/// draws candles.
Image render_window(std::span<const market_data::Bar> window,
                    const std::optional<WindowIndicators>& indicators, const ChartStyle& style);

/// Channel-first (3, H, W), scaled into [0, 1].
template <typename T>
nn::Tensor<T> image_to_tensor(const Image& img)
{
    nn::Tensor<T> out({3, static_cast<std::size_t>(img.height), static_cast<std::size_t>(img.width)});
    const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < 3; ++c) {
            out.data[c * plane + p] = static_cast<T>(img.pixels[p * 3 + c]) / T{255};
        }
    }
    return out;
}

/// Fills a preallocated (3, H, W) buffer; same mapping as image_to_tensor.
template <typename T>
void image_to_tensor(const Image& img, std::span<T> out)
{
    const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < 3; ++c) {
            out[c * plane + p] = static_cast<T>(img.pixels[p * 3 + c]) / T{255};
        }
    }
}

/// Inverse of image_to_tensor up to quantisation.
template <typename T>
Image tensor_to_image(const nn::Tensor<T>& t);

std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const std::filesystem::path& path, const Image& img);

} // namespace stockcnn::imaging
