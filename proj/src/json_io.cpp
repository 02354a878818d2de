#include "pz/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string_view>

#include "json.hpp"
#include "pz/metrics.hpp"

namespace pz {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path);
    out << text;
    if (!out) throw FormatError("write failed for " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec json_vec(const json& a) {
    if (!a.is_array()) throw FormatError("expected a numeric array");
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

// Schema strings are "<kind>/<major>".
void check_schema(const json& j, const char* expected) {
    if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string())
        throw FormatError("missing schema field");
    const std::string got = j.at("schema").get<std::string>();
    if (got == expected) return;
    const std::string_view e(expected), g(got);
    const auto es = e.rfind('/');
    const auto gs = g.rfind('/');
    if (es != std::string_view::npos && gs != std::string_view::npos &&
        e.substr(0, es) == g.substr(0, gs))
        throw FormatError("unsupported schema version '" + got +
                          "', this reader handles " + expected);
    throw FormatError("expected a " + std::string(expected) +
                      " record, got '" + got + "'");
}

json model_object(const PoleZeroModel& model) {
    return json{{"a", vec_json(model.a)},
                {"b", vec_json(model.b)},
                {"gain", model.gain}};
}

PoleZeroModel parse_model(const json& j) {
    PoleZeroModel model;
    model.a = json_vec(j.at("a"));
    model.b = json_vec(j.at("b"));
    model.gain = j.at("gain").get<double>();
    return model;
}

json formants_json(const std::vector<Formant>& fs) {
    json a = json::array();
    for (const Formant& f : fs)
        a.push_back(json::array({f.frequency_hz, f.bandwidth_hz}));
    return a;
}

std::vector<Formant> parse_formants(const json& a) {
    if (!a.is_array()) throw FormatError("formant list must be an array");
    std::vector<Formant> out;
    for (const json& f : a) {
        if (!f.is_array() || f.size() != 2)
            throw FormatError("formant entries must be [frequency, bandwidth]");
        out.push_back(Formant{f[0].get<double>(), f[1].get<double>()});
    }
    return out;
}

json spec_json(const SynthSpec& spec) {
    json j{{"f0_hz", spec.f0},
           {"sample_rate", spec.sample_rate},
           {"n_samples", spec.n_samples},
           {"formants", formants_json(spec.resonator.formants)},
           {"antiformants", formants_json(spec.resonator.antiformants)},
           {"lf",
            {{"ee", spec.lf.Ee},
             {"tp", spec.lf.Tp},
             {"te", spec.lf.Te},
             {"ta", spec.lf.Ta},
             {"tc", spec.lf.Tc}}},
           {"seed", spec.seed}};
    if (std::isinf(spec.ratio_db))
        j["ratio_db"] = nullptr;
    else
        j["ratio_db"] = spec.ratio_db;
    return j;
}

SynthSpec parse_spec(const json& j) {
    SynthSpec spec;
    spec.f0 = j.value("f0_hz", spec.f0);
    spec.sample_rate = j.value("sample_rate", spec.sample_rate);
    spec.n_samples = j.value("n_samples", spec.n_samples);
    if (j.contains("formants"))
        spec.resonator.formants = parse_formants(j.at("formants"));
    if (j.contains("antiformants"))
        spec.resonator.antiformants = parse_formants(j.at("antiformants"));
    spec.resonator.sample_rate = spec.sample_rate;
    if (j.contains("lf")) {
        const json& lf = j.at("lf");
        spec.lf.Ee = lf.value("ee", spec.lf.Ee);
        spec.lf.Tp = lf.value("tp", spec.lf.Tp);
        spec.lf.Te = lf.value("te", spec.lf.Te);
        spec.lf.Ta = lf.value("ta", spec.lf.Ta);
        spec.lf.Tc = lf.value("tc", spec.lf.Tc);
    }
    if (j.contains("ratio_db") && j.at("ratio_db").is_null())
        spec.ratio_db = std::numeric_limits<double>::infinity();
    else
        spec.ratio_db = j.value("ratio_db", spec.ratio_db);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

json method_json(const MethodSpec& m) {
    json j{{"method", m.method},
           {"k", m.k},
           {"l", m.l},
           {"max_iters", m.max_iters},
           {"tol", m.tol}};
    if (m.uses_blocks()) j["block_size"] = m.block_size;
    return j;
}

MethodSpec parse_method(const json& j) {
    MethodSpec m;
    m.method = j.at("method").get<std::string>();
    m.k = j.value("k", m.k);
    m.l = j.value("l", m.l);
    m.block_size = j.value("block_size", m.block_size);
    m.max_iters = j.value("max_iters", m.max_iters);
    m.tol = j.value("tol", m.tol);
    return m;
}

}  // namespace

std::string synth_frame_json(const SynthFrame& frame) {
    const json j{{"schema", kSynthFrameSchema},
                 {"spec", spec_json(frame.spec)},
                 {"model_true", model_object(frame.model_true)},
                 {"pulse_onset", frame.pulse_onset},
                 {"y", vec_json(frame.y.samples)},
                 {"e_true", vec_json(frame.e_true)},
                 {"m_true", vec_json(frame.m_true)}};
    return dump(j);
}

void write_synth_frame(const std::string& path, const SynthFrame& frame) {
    write_text(path, synth_frame_json(frame));
}

SynthFrame read_synth_frame(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, kSynthFrameSchema);
    try {
        SynthFrame frame;
        frame.spec = parse_spec(j.at("spec"));
        frame.model_true = parse_model(j.at("model_true"));
        frame.pulse_onset = j.at("pulse_onset").get<Eigen::Index>();
        frame.y = Frame{json_vec(j.at("y")), frame.spec.sample_rate};
        frame.e_true = json_vec(j.at("e_true"));
        frame.m_true = json_vec(j.at("m_true"));
        return frame;
    } catch (const json::exception& e) {
        throw FormatError("malformed synth-frame record in " + path + ": " +
                          e.what());
    }
}

std::string analysis_result_json(const AnalysisResult& result,
                                 const std::string& method,
                                 double sample_rate) {
    const int n_points = 512;
    const CVec h = frequency_response(result.model, n_points);
    json freq = json::array();
    json mag = json::array();
    for (int i = 0; i < n_points; ++i) {
        freq.push_back(0.5 * sample_rate * i / (n_points - 1));
        const double m = std::max(std::abs(h[i]), 1e-300);
        mag.push_back(20.0 * std::log10(m));
    }

    const json j{{"schema", kAnalysisResultSchema},
                 {"method", method},
                 {"sample_rate", sample_rate},
                 {"model", model_object(result.model)},
                 {"residual_mean", vec_json(result.residual_mean)},
                 {"expected_alpha", vec_json(result.expected_alpha)},
                 {"expected_gamma", result.expected_gamma},
                 {"iterations", result.iterations},
                 {"converged", result.converged},
                 {"final_elbo", result.final_elbo},
                 {"elbo_trace", result.elbo_trace},
                 {"frequency_response",
                  {{"frequency_hz", std::move(freq)},
                   {"magnitude_db", std::move(mag)}}}};
    return dump(j);
}

void write_analysis_result(const std::string& path,
                           const AnalysisResult& result,
                           const std::string& method, double sample_rate) {
    write_text(path, analysis_result_json(result, method, sample_rate));
}

AnalysisResult read_analysis_result(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, kAnalysisResultSchema);
    try {
        AnalysisResult r;
        r.model = parse_model(j.at("model"));
        r.residual_mean = json_vec(j.at("residual_mean"));
        r.expected_alpha = json_vec(j.at("expected_alpha"));
        r.expected_gamma = j.at("expected_gamma").get<double>();
        r.iterations = j.at("iterations").get<int>();
        r.converged = j.at("converged").get<bool>();
        r.final_elbo = j.at("final_elbo").get<double>();
        r.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
        return r;
    } catch (const json::exception& e) {
        throw FormatError("malformed analysis-result record in " + path +
                          ": " + e.what());
    }
}

std::string model_json(const PoleZeroModel& model) {
    json j = model_object(model);
    j["schema"] = kModelSchema;
    return dump(j);
}

void write_model(const std::string& path, const PoleZeroModel& model) {
    write_text(path, model_json(model));
}

PoleZeroModel read_model_any(const std::string& path) {
    const json j = load_json(path);
    if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string())
        throw FormatError("missing schema field in " + path);
    const std::string schema = j.at("schema").get<std::string>();
    const std::string_view kind =
        std::string_view(schema).substr(0, schema.rfind('/'));
    try {
        if (kind == "pz.model") {
            check_schema(j, kModelSchema);
            return parse_model(j);
        }
        if (kind == "pz.synth-frame") {
            check_schema(j, kSynthFrameSchema);
            return parse_model(j.at("model_true"));
        }
        if (kind == "pz.analysis-result") {
            check_schema(j, kAnalysisResultSchema);
            return parse_model(j.at("model"));
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed record in " + path + ": " + e.what());
    }
    throw FormatError("no model in record '" + schema + "' from " + path);
}

std::string experiment_config_json(const ExperimentConfig& config) {
    json methods = json::array();
    for (const MethodSpec& m : config.methods) methods.push_back(method_json(m));
    const json j{{"schema", kExperimentConfigSchema},
                 {"f0_hz", config.f0_values},
                 {"runs", config.runs},
                 {"methods", std::move(methods)},
                 {"synth", spec_json(config.synth)},
                 {"output_csv", config.output_csv},
                 {"master_seed", config.master_seed},
                 {"threads", config.threads},
                 {"sd_order", config.sd_order}};
    return dump(j);
}

void write_experiment_config(const std::string& path,
                             const ExperimentConfig& config) {
    write_text(path, experiment_config_json(config));
}

ExperimentConfig read_experiment_config(const std::string& path) {
    const json j = load_json(path);
    check_schema(j, kExperimentConfigSchema);
    try {
        ExperimentConfig config;
        config.f0_values = j.at("f0_hz").get<std::vector<double>>();
        config.runs = j.at("runs").get<int>();
        if (config.runs < 1)
            throw FormatError("experiment config: runs must be >= 1");
        for (const json& m : j.at("methods"))
            config.methods.push_back(parse_method(m));
        if (j.contains("synth")) config.synth = parse_spec(j.at("synth"));
        config.output_csv = j.value("output_csv", config.output_csv);
        config.master_seed = j.value("master_seed", config.master_seed);
        config.threads = j.value("threads", config.threads);
        config.sd_order = j.value("sd_order", config.sd_order);
        return config;
    } catch (const json::exception& e) {
        throw FormatError("malformed experiment config in " + path + ": " +
                          e.what());
    }
}

}  // namespace pz
