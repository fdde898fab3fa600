#include "ajd/model_io.hpp"

#include <fstream>

namespace ajd {

Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Vec& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Mat matrix_from_json(const Json& j) {
    require(j.is_array() && !j.empty(), "matrix: expected nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        require(static_cast<int>(j.at(i).size()) == cols, "matrix: ragged rows");
        for (int k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
    }
    return m;
}

Vec vector_from_json(const Json& j) {
    require(j.is_array(), "vector: expected array");
    Vec v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

namespace {

Json jumps_to_json(const JumpDist& dist) {
    Json out;
    if (dist.kind() == JumpDist::Kind::Degenerate) {
        out["kind"] = "degenerate";
        out["z0"] = vector_to_json(dist.mean());
        return out;
    }
    out["kind"] = "product";
    Json comps = Json::array();
    for (const auto& c : dist.components()) {
        Json jc;
        if (const auto* pm = std::get_if<PointMass>(&c)) {
            jc["type"] = "point";
            jc["value"] = pm->value;
        } else if (const auto* e = std::get_if<Exponential>(&c)) {
            jc["type"] = "exponential";
            jc["rate"] = e->rate;
        } else {
            const auto& g = std::get<Gaussian>(c);
            jc["type"] = "gaussian";
            jc["mean"] = g.mean;
            jc["var"] = g.var;
        }
        comps.push_back(std::move(jc));
    }
    out["components"] = std::move(comps);
    return out;
}

JumpDist jumps_from_json(const Json& j, int d) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "degenerate") return JumpDist::degenerate(vector_from_json(j.at("z0")));
    require(kind == "product", "jumps: kind must be 'degenerate' or 'product'");
    std::vector<JumpMarginal> comps;
    for (const auto& jc : j.at("components")) {
        const std::string type = jc.at("type").get<std::string>();
        if (type == "point") {
            comps.push_back(PointMass{jc.at("value").get<double>()});
        } else if (type == "exponential") {
            comps.push_back(Exponential{jc.at("rate").get<double>()});
        } else if (type == "gaussian") {
            comps.push_back(Gaussian{jc.at("mean").get<double>(), jc.at("var").get<double>()});
        } else {
            throw std::invalid_argument("jumps: unknown component type '" + type + "'");
        }
    }
    require(static_cast<int>(comps.size()) == d, "jumps: component count must equal d");
    return JumpDist::product(std::move(comps));
}

}  // namespace

Json spec_to_json(const ModelSpec& spec) {
    Json j;
    j["d"] = spec.d;
    j["m"] = spec.m;
    j["a"] = matrix_to_json(spec.a);
    Json alphas = Json::array();
    for (const auto& ai : spec.alpha) alphas.push_back(matrix_to_json(ai));
    j["alpha"] = std::move(alphas);
    j["b"] = vector_to_json(spec.b);
    j["beta"] = matrix_to_json(spec.beta);
    j["lambda"] = spec.lambda0;
    j["kappa"] = vector_to_json(spec.kappa);
    j["jumps"] = jumps_to_json(spec.jumps);
    return j;
}

ModelSpec spec_from_json(const Json& j) {
    ModelSpec spec;
    spec.d = j.at("d").get<int>();
    spec.m = j.at("m").get<int>();
    spec.a = matrix_from_json(j.at("a"));
    spec.alpha.clear();
    for (const auto& ja : j.at("alpha")) spec.alpha.push_back(matrix_from_json(ja));
    spec.b = vector_from_json(j.at("b"));
    spec.beta = matrix_from_json(j.at("beta"));
    spec.lambda0 = j.value("lambda", 0.0);
    spec.kappa = j.contains("kappa") ? vector_from_json(j.at("kappa")) : Vec::Zero(spec.d).eval();
    spec.jumps = j.contains("jumps") ? jumps_from_json(j.at("jumps"), spec.d)
                                     : JumpDist::degenerate(Vec::Zero(spec.d));
    return spec;
}

ModelSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open spec file: " + path);
    Json j;
    in >> j;
    return spec_from_json(j);
}

void save_spec(const ModelSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << spec_to_json(spec).dump(2) << "\n";
}

Json validation_to_json(const ValidationReport& report) {
    Json j;
    j["admissible"] = report.admissible;
    j["feller_ok"] = report.feller_ok;
    Json v = Json::array();
    for (const auto& viol : report.violations)
        v.push_back(Json{{"field", viol.field}, {"description", viol.description}});
    j["violations"] = std::move(v);
    return j;
}

}  // namespace ajd
