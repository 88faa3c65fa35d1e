#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "stockcnn/error.hpp"
#include "stockcnn/imaging.hpp"
#include "stockcnn/indicators.hpp"
#include "support.hpp"

using namespace stockcnn;
using namespace stockcnn::imaging;
using market_data::Bar;

namespace {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct Fixture {
    market_data::Series series;
    indicators::Bundle bundle;
    std::span<const Bar> window() const { return std::span(series.bars).subspan(60, 60); }
    WindowIndicators ind() const { return slice_indicators(bundle, 60, 60); }
};

Fixture fixture(std::uint64_t seed = 2024)
{
    Fixture f;
    f.series = testing_support::random_walk(120, seed);
    f.bundle = indicators::compute_bundle(f.series.closes());
    return f;
}

std::size_t count_color(const Image& img, Rgb c, int y_from = 0, int y_to = -1)
{
    if (y_to < 0) y_to = img.height;
    std::size_t n = 0;
    for (int y = y_from; y < y_to; ++y) {
        for (int x = 0; x < img.width; ++x) n += img.at(x, y) == c;
    }
    return n;
}

std::vector<Bar> flat_window(double price)
{
    std::vector<Bar> bars;
    for (const Date& d : testing_support::trading_days(make_date(2019, 1, 2), 60)) {
        bars.push_back(Bar{d, price, price, price, price, price, 100});
    }
    return bars;
}

} // namespace

TEST(ChartStyle, LayoutsSumToOne)
{
    for (Variant v : kAllVariants) {
        const ChartStyle s = ChartStyle::for_variant(v);
        EXPECT_NO_THROW(check_style(s));
        double sum = 0;
        for (const Panel& p : s.layout) sum += p.fraction;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_EQ(parse_variant(to_string(v)), v);
    }
    EXPECT_FALSE(parse_variant("candles").has_value());
}

TEST(ChartStyle, SizeMustBeMultipleOf16)
{
    EXPECT_THROW(check_style(ChartStyle::for_variant(Variant::Volume, 90, 96)), std::invalid_argument);
    EXPECT_THROW(check_style(ChartStyle::for_variant(Variant::Volume, 96, 0)), std::invalid_argument);
    ChartStyle bad = ChartStyle::for_variant(Variant::Volume);
    bad.layout[0].fraction = 0.5;
    EXPECT_THROW(check_style(bad), std::invalid_argument);
}

TEST(ChartStyle, PanelOrder)
{
    const auto order = [](Variant v) {
        std::vector<PanelKind> k;
        for (const Panel& p : default_layout(v)) k.push_back(p.kind);
        return k;
    };
    EXPECT_EQ(order(Variant::MacdMa), (std::vector{PanelKind::Price, PanelKind::Macd, PanelKind::Volume}));
    EXPECT_EQ(order(Variant::MacdVolumeLower),
              (std::vector{PanelKind::Price, PanelKind::Volume, PanelKind::Macd}));
    const auto rows = panel_rows(ChartStyle::for_variant(Variant::Volume));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].bottom, 72);
    EXPECT_EQ(rows[1].bottom, 96);
}

TEST(RenderCandles, DojiIsOneRowBodyWithoutWick)
{
    auto bars = flat_window(10.0);
    // Spread the range so the doji sits at a real price level.
    bars[0] = Bar{bars[0].date, 10, 12, 8, 10.5, 10.5, 1};
    const ChartStyle style = ChartStyle::for_variant(Variant::NoVolume);
    const Image img = render_candles(bars, std::nullopt, style);
    const int x0 = static_cast<int>(30 * 96 / 60);
    std::size_t body_rows = 0;
    for (int y = 0; y < img.height; ++y) {
        EXPECT_NE(img.at(x0, y), style.wick_color);
        body_rows += img.at(x0, y) == style.bearish_color;
    }
    EXPECT_EQ(body_rows, 1u);
}

TEST(RenderCandles, AllBullishHasNoBearishPixels)
{
    const Fixture f = fixture();
    auto bars = std::vector<Bar>(f.window().begin(), f.window().end());
    for (Bar& b : bars) {
        const double lo = std::min(b.open, b.close), hi = std::max(b.open, b.close);
        b.open = lo;
        b.close = hi + 0.5;
        b.high = std::max(b.high, b.close);
    }
    const ChartStyle style = ChartStyle::for_variant(Variant::NoVolume);
    const Image img = render_candles(bars, std::nullopt, style);
    EXPECT_EQ(count_color(img, style.bearish_color), 0u);
    EXPECT_GT(count_color(img, style.bullish_color), 0u);
}

TEST(RenderCandles, ColorPartitionOfBodies)
{
    const Fixture f = fixture(5);
    const ChartStyle style = ChartStyle::for_variant(Variant::NoVolume);
    const Image img = render_candles(f.window(), std::nullopt, style);
    const int slot = 96 / 60;
    for (std::size_t k = 0; k < 60; ++k) {
        const Bar& b = f.window()[k];
        const int x = static_cast<int>(k * 96 / 60);
        const Rgb want = b.close > b.open ? style.bullish_color : style.bearish_color;
        const Rgb other = b.close > b.open ? style.bearish_color : style.bullish_color;
        std::size_t hits = 0;
        for (int y = 0; y < img.height; ++y) {
            hits += img.at(x, y) == want;
            EXPECT_NE(img.at(x, y), other);
        }
        EXPECT_GE(hits, 1u) << k << " slot " << slot;
    }
}

TEST(RenderCandles, PanelContainment)
{
    const Fixture f = fixture(9);
    for (Variant v : {Variant::Volume, Variant::MacdMa, Variant::MacdVolumeLower}) {
        const ChartStyle style = ChartStyle::for_variant(v);
        const Image img = render_candles(f.window(), f.ind(), style);
        const int boundary = panel_rows(style)[0].bottom;
        EXPECT_EQ(count_color(img, style.bullish_color, boundary) + count_color(img, style.bearish_color, boundary) +
                      count_color(img, style.wick_color, boundary),
                  0u)
            << to_string(v);
        EXPECT_GT(count_color(img, style.volume_color, boundary), 0u);
    }
}

TEST(RenderCandles, IndicatorVariantsDrawOverlays)
{
    const Fixture f = fixture(9);
    const ChartStyle style = ChartStyle::for_variant(Variant::MacdMa);
    const Image img = render_candles(f.window(), f.ind(), style);
    const auto rows = panel_rows(style);
    EXPECT_GT(count_color(img, style.sma30_color, rows[0].top, rows[0].bottom), 0u);
    EXPECT_GT(count_color(img, style.histogram_color, rows[1].top, rows[1].bottom), 0u);
    EXPECT_EQ(count_color(render_candles(f.window(), std::nullopt, ChartStyle::for_variant(Variant::Volume)),
                          style.sma30_color),
              0u);
}

TEST(RenderCandles, Errors)
{
    const Fixture f = fixture();
    const auto short_window = f.window().subspan(0, 59);
    try {
        render_candles(short_window, std::nullopt, ChartStyle::for_variant(Variant::NoVolume));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WrongWindowLength);
    }
    try {
        render_candles(f.window(), std::nullopt, ChartStyle::for_variant(Variant::MacdMa));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingIndicators);
    }
    try {
        slice_indicators(f.bundle, 0, 60);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingIndicators);
    }
}

TEST(RenderCandles, ZeroRangeWindowUsesMidline)
{
    const ChartStyle style = ChartStyle::for_variant(Variant::NoVolume);
    const Image img = render_candles(flat_window(5.0), std::nullopt, style);
    EXPECT_EQ(count_color(img, style.bearish_color, 47, 48), static_cast<std::size_t>(count_color(img, style.bearish_color)));
    EXPECT_GT(count_color(img, style.bearish_color), 0u);
}

TEST(RenderCandles, DeterministicAndGolden)
{
    const Fixture f = fixture(2024);
    // FNV-1a of the pixel buffers, recorded after visual review of the PNGs.
    const std::uint64_t expected[] = {2108492358144435198ULL, 15380457949377739510ULL, 12667272429341890472ULL,
                                      7586260105403263980ULL, 10012089956120646696ULL};
    for (std::size_t i = 0; i < kAllVariants.size(); ++i) {
        const ChartStyle style = ChartStyle::for_variant(kAllVariants[i]);
        const Image a = render_window(f.window(), f.ind(), style);
        const Image b = render_window(f.window(), f.ind(), style);
        EXPECT_EQ(a.pixels, b.pixels);
        EXPECT_EQ(fnv1a(a.pixels), expected[i]) << to_string(kAllVariants[i]) << " 0x" << std::hex << fnv1a(a.pixels);
    }
}

TEST(Gaf, ConstantMaxWindow)
{
    // Every point at the maximum except one at the minimum.
    std::vector<double> x(60, 5.0);
    x[0] = 1.0;
    const GafMatrix g = gaf(x);
    for (std::size_t i = 1; i < 60; ++i) {
        for (std::size_t j = 1; j < 60; ++j) EXPECT_NEAR(g(i, j), 1.0, 1e-15);
    }
}

TEST(Gaf, TwoPointHandValues)
{
    const std::vector<double> x{0.0, 1.0};
    const GafMatrix g = gaf(x);
    EXPECT_EQ(g.rescaled, (std::vector<double>{-1.0, 1.0}));
    EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(g(0, 1), -1.0, 1e-15);
    EXPECT_NEAR(g(1, 0), -1.0, 1e-15);
    EXPECT_NEAR(g(1, 1), 1.0, 1e-15);
}

TEST(Gaf, MatchesTrigonometricDefinition)
{
    Rng rng(3);
    std::vector<double> x(60);
    for (double& v : x) v = rng.uniform(50, 150);
    const GafMatrix g = gaf(x);
    for (std::size_t i = 0; i < 60; ++i) {
        for (std::size_t j = 0; j < 60; ++j) {
            EXPECT_NEAR(g(i, j), std::cos(std::acos(g.rescaled[i]) + std::acos(g.rescaled[j])), 1e-12);
        }
    }
}

TEST(Gaf, FlatWindowIsZeroRescaled)
{
    const std::vector<double> x(60, 3.0);
    const GafMatrix g = gaf(x);
    for (double v : g.rescaled) EXPECT_EQ(v, 0.0);
    for (std::size_t i = 0; i < 60; ++i) EXPECT_NEAR(g(i, i), -1.0, 1e-15);
}

TEST(GafToImage, Endpoints)
{
    const ChartStyle style = ChartStyle::for_variant(Variant::Gaf);
    GafMatrix ones{3, {1, 1, 1}, std::vector<double>(9, 1.0)};
    const Image white = gaf_to_image(ones, style);
    for (std::uint8_t p : white.pixels) ASSERT_EQ(p, 255);
    GafMatrix neg{3, {0, 0, 0}, std::vector<double>(9, -1.0)};
    const Image black = gaf_to_image(neg, style);
    for (std::uint8_t p : black.pixels) ASSERT_EQ(p, 0);
    EXPECT_THROW(gaf_to_image(ones, ChartStyle::for_variant(Variant::Volume)), std::invalid_argument);
}

TEST(GafToImage, NearestNeighbourBlocks)
{
    ChartStyle style = ChartStyle::for_variant(Variant::Gaf, 4, 4);
    const GafMatrix g = gaf(std::vector<double>{0.0, 1.0});
    const Image img = gaf_to_image(g, style);
    ASSERT_EQ(img.width, 4);
    const std::uint8_t expected[4][4] = {{255, 255, 0, 0}, {255, 255, 0, 0}, {0, 0, 255, 255}, {0, 0, 255, 255}};
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            const Rgb c = img.at(x, y);
            EXPECT_EQ(c.r, expected[y][x]);
            EXPECT_EQ(c.g, c.r);
            EXPECT_EQ(c.b, c.r);
        }
    }
}

TEST(ImageToTensor, MappingAndRoundTrip)
{
    const Image zero(8, 4, Rgb{0, 0, 0});
    const auto t0 = image_to_tensor<double>(zero);
    EXPECT_EQ(t0.shape, (nn::Shape{3, 4, 8}));
    for (double v : t0.data) EXPECT_EQ(v, 0.0);

    Image img(2, 2, Rgb{255, 10, 0});
    img.set(1, 1, Rgb{1, 2, 3});
    const auto t = image_to_tensor<float>(img);
    EXPECT_EQ(t.at(0, 0, 0), 1.0f);
    EXPECT_FLOAT_EQ(t.at(1, 0, 0), 10.0f / 255);
    EXPECT_FLOAT_EQ(t.at(2, 1, 1), 3.0f / 255);
    EXPECT_EQ(tensor_to_image(t).pixels, img.pixels);

    Rng rng(4);
    nn::Tensor<double> r({3, 5, 7});
    for (double& v : r.data) v = rng.uniform();
    const auto back = image_to_tensor<double>(tensor_to_image(r));
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(std::abs(back.data[i] - r.data[i]), 1.0 / 255);
}

TEST(Png, SignatureAndDimensions)
{
    const Fixture f = fixture();
    const Image img = render_window(f.window(), f.ind(), ChartStyle::for_variant(Variant::MacdMa));
    const auto png = encode_png(img);
    ASSERT_GT(png.size(), 33u);
    const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    EXPECT_TRUE(std::equal(sig, sig + 8, png.begin()));
    EXPECT_EQ(png[19], 96); // IHDR width, big-endian low byte
    EXPECT_EQ(png[23], 96);
    EXPECT_EQ(png[24], 8);  // bit depth
    EXPECT_EQ(png[25], 2);  // truecolor
    EXPECT_EQ(encode_png(img), png);
}
