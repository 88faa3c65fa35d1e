#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "stockcnn/dataset.hpp"
#include "stockcnn/error.hpp"
#include "stockcnn/experiment/commands.hpp"
#include "stockcnn/imaging.hpp"
#include "stockcnn/indicators.hpp"
#include "stockcnn/market_data.hpp"
#include "stockcnn/metrics.hpp"
#include "stockcnn/nn/checkpoint.hpp"

namespace py = pybind11;
using namespace stockcnn;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a)
{
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> with_nan(const indicators::IndicatorSeries& s)
{
    py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
    auto v = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < s.size(); ++i) v(i) = s[i].value_or(std::numeric_limits<double>::quiet_NaN());
    return out;
}

py::array_t<std::uint8_t> to_array(const imaging::Image& img)
{
    py::array_t<std::uint8_t> out({img.height, img.width, 3});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
}

imaging::Image from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 3 || a.shape(2) != 3) throw std::invalid_argument("expected an (H, W, 3) uint8 array");
    imaging::Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.pixels.begin());
    return img;
}

imaging::Variant variant_of(const std::string& name)
{
    const auto v = imaging::parse_variant(name);
    if (!v) throw std::invalid_argument("unknown variant: " + name);
    return *v;
}

Date date_of(const std::string& text)
{
    const auto d = parse_date(text);
    if (!d) throw std::invalid_argument("bad date: " + text);
    return *d;
}

py::tuple split_tuple(const dataset::SplitResult& s)
{
    return py::make_tuple(s.train, s.test);
}

py::dict row_dict(const experiment::ResultRow& r)
{
    py::dict d;
    d["strategy"] = std::string(dataset::to_string(r.strategy));
    d["variant"] = std::string(imaging::to_string(r.variant));
    d["horizon"] = r.horizon;
    d["status"] = r.status;
    d["n_train"] = r.n_train;
    d["n_test"] = r.n_test;
    if (r.ok()) {
        d["tp"] = r.confusion.tp;
        d["fp"] = r.confusion.fp;
        d["tn"] = r.confusion.tn;
        d["fn"] = r.confusion.fn;
        d["accuracy"] = r.accuracy();
        d["mcc"] = r.mcc();
    }
    return d;
}

class Model {
public:
    Model(const std::filesystem::path& checkpoint, std::size_t height, std::size_t width)
        : net_(nn::ModelSpec::trend_cnn(height, width),
               nn::load_checkpoint(checkpoint, nn::ModelSpec::trend_cnn(height, width)))
    {
    }

    py::tuple predict(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image) const
    {
        const auto p = net_.predict(imaging::image_to_tensor<float>(from_array(image)));
        return py::make_tuple(p.label, py::make_tuple(p.probability[0], p.probability[1]));
    }

private:
    nn::Network<float> net_;
};

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Candlestick-image trend classification core";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
    error.call_once_and_store_result([&] { return py::exception<Error>(m, "Error"); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error.get_stored(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    m.attr("__version__") = experiment::code_version();
    m.attr("VARIANTS") = [] {
        std::vector<std::string> names;
        for (auto v : imaging::kAllVariants) names.emplace_back(imaging::to_string(v));
        return names;
    }();

    py::class_<market_data::Series>(m, "Series")
        .def_readonly("ticker", &market_data::Series::ticker)
        .def("__len__", &market_data::Series::size)
        .def_property_readonly("dates", [](const market_data::Series& s) {
            std::vector<std::string> out;
            for (const auto& b : s.bars) out.push_back(format_date(b.date));
            return out;
        })
        .def_property_readonly("closes", [](const market_data::Series& s) { return py::array_t<double>(py::cast(s.closes())); })
        .def("to_csv", &market_data::serialize_csv);

    m.def("parse_csv", [](const std::string& text, const std::string& ticker) { return market_data::parse_csv(text, ticker); },
          py::arg("text"), py::arg("ticker") = "");
    m.def("load_csv", &market_data::load_csv, py::arg("path"), py::arg("ticker"));
    m.def("validate", [](const market_data::Series& s) {
        std::vector<std::pair<std::size_t, std::string>> out;
        for (const auto& v : market_data::validate(s)) out.emplace_back(v.bar_index, v.rule);
        return out;
    });

    m.def("sma", [](const Array& c, std::size_t n) { return with_nan(indicators::sma(to_vector(c), n)); },
          py::arg("closes"), py::arg("n"));
    m.def("ema", [](const Array& c, std::size_t n) { return with_nan(indicators::ema(to_vector(c), n)); },
          py::arg("closes"), py::arg("n"));
    m.def("macd", [](const Array& c) {
        const auto r = indicators::macd(to_vector(c));
        return py::make_tuple(with_nan(r.macd_line), with_nan(r.signal_line), with_nan(r.histogram));
    }, py::arg("closes"));

    m.def("gaf", [](const Array& c) {
        const auto g = imaging::gaf(to_vector(c));
        py::array_t<double> out({g.n, g.n});
        std::copy(g.entries.begin(), g.entries.end(), out.mutable_data());
        return out;
    }, py::arg("closes"));

    m.def("render", [](const market_data::Series& s, std::size_t end_index, const std::string& variant, int width, int height) {
        if (end_index + 1 < imaging::kWindowBars || end_index >= s.size()) {
            throw Error(ErrorKind::IndexOutOfRange, "window ending at " + std::to_string(end_index));
        }
        const auto style = imaging::ChartStyle::for_variant(variant_of(variant), width, height);
        const std::size_t first = end_index + 1 - imaging::kWindowBars;
        const std::span<const market_data::Bar> window(s.bars.data() + first, imaging::kWindowBars);
        std::optional<imaging::WindowIndicators> ind;
        if (imaging::needs_indicators(style.variant)) {
            ind = imaging::slice_indicators(indicators::compute_bundle(s.closes()), first, imaging::kWindowBars);
        }
        return to_array(imaging::render_window(window, ind, style));
    }, py::arg("series"), py::arg("end_index"), py::arg("variant") = "macd_ma", py::arg("width") = 96,
       py::arg("height") = 96);

    m.def("label", &dataset::label, py::arg("series"), py::arg("i"), py::arg("d"));
    m.def("sample_count", &dataset::sample_count, py::arg("length"), py::arg("horizon"));
    m.def("build_samples", [](const market_data::Series& s, int horizon, const std::string& variant, int width, int height) {
        py::list out;
        for (const auto& smp : dataset::build_samples(s, horizon, imaging::ChartStyle::for_variant(variant_of(variant), width, height))) {
            py::dict d;
            d["end_index"] = smp.end_index;
            d["end_date"] = format_date(smp.end_date);
            d["label"] = smp.label;
            d["image"] = to_array(smp.image);
            out.append(d);
        }
        return out;
    }, py::arg("series"), py::arg("horizon"), py::arg("variant") = "macd_ma", py::arg("width") = 96,
       py::arg("height") = 96);

    m.def("split_random", [](std::size_t n, double ratio, std::uint64_t seed) {
        return split_tuple(dataset::split_random(n, ratio, seed));
    }, py::arg("n"), py::arg("test_ratio"), py::arg("seed"));
    m.def("split_automatic", [](std::size_t n, double ratio) { return split_tuple(dataset::split_automatic(n, ratio)); },
          py::arg("n"), py::arg("train_ratio"));
    m.def("split_time", [](const std::vector<std::string>& dates, const std::string& cutoff) {
        std::vector<Date> ends;
        for (const auto& d : dates) ends.push_back(date_of(d));
        return split_tuple(dataset::split_time(std::span<const Date>(ends), date_of(cutoff)));
    }, py::arg("end_dates"), py::arg("cutoff"));

    m.def("confusion", [](const std::vector<int>& pred, const std::vector<int>& labels) {
        const auto c = metrics::confusion(pred, labels);
        return py::make_tuple(c.tp, c.fp, c.tn, c.fn);
    }, py::arg("predictions"), py::arg("labels"));
    m.def("scores", [](std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
        const metrics::Confusion c{tp, fp, tn, fn};
        py::dict d;
        d["sensitivity"] = metrics::sensitivity(c);
        d["specificity"] = metrics::specificity(c);
        d["accuracy"] = metrics::accuracy(c);
        d["mcc"] = metrics::mcc(c);
        return d;
    }, py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));

    m.def("parameter_count", [](std::size_t height, std::size_t width) {
        return nn::ModelSpec::trend_cnn(height, width).param_count();
    }, py::arg("height") = 96, py::arg("width") = 96);

    py::class_<Model>(m, "Model")
        .def(py::init<const std::filesystem::path&, std::size_t, std::size_t>(), py::arg("checkpoint"),
             py::arg("height") = 96, py::arg("width") = 96)
        .def("predict", &Model::predict, py::arg("image"));

    m.def("config_hash", [](const std::filesystem::path& path) { return experiment::config_hash(experiment::load_config(path)); });
    m.def("run_matrix", [](const std::filesystem::path& path) {
        const auto config = experiment::load_config(path);
        std::ostringstream log;
        experiment::MatrixOutcome outcome;
        {
            py::gil_scoped_release release;
            outcome = experiment::cmd_matrix(config, log);
        }
        py::list rows;
        for (const auto& r : outcome.rows) rows.append(row_dict(r));
        return rows;
    }, py::arg("config"));
}
