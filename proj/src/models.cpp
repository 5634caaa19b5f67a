#include "rtlab/models.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace rtlab {

using nlohmann::json;

namespace {

constexpr int kIn = Mlp::kIn;
constexpr int kHidden = Mlp::kHidden;
constexpr int kOut = Mlp::kOut;

struct ForwardCache {
    std::array<double, kHidden> z1, h1, z2, h2;
    Scores out;
};

ForwardCache forward_cached(const Mlp& mlp, const FeatureVector& input) {
    ForwardCache c;
    for (int i = 0; i < kHidden; ++i) {
        double z = mlp.b1[i];
        const double* row = &mlp.w1[static_cast<std::size_t>(i) * kIn];
        for (int j = 0; j < kIn; ++j) z += row[j] * input[j];
        c.z1[i] = z;
        c.h1[i] = z > 0 ? z : 0.0;
    }
    for (int i = 0; i < kHidden; ++i) {
        double z = mlp.b2[i];
        const double* row = &mlp.w2[static_cast<std::size_t>(i) * kHidden];
        for (int j = 0; j < kHidden; ++j) z += row[j] * c.h1[j];
        c.z2[i] = z;
        c.h2[i] = z > 0 ? z : 0.0;
    }
    for (int i = 0; i < kOut; ++i) {
        double z = mlp.b3[i];
        const double* row = &mlp.w3[static_cast<std::size_t>(i) * kHidden];
        for (int j = 0; j < kHidden; ++j) z += row[j] * c.h2[j];
        c.out[i] = z;
    }
    return c;
}

void check_finite_input(const FeatureVector& input) {
    for (double v : input)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature input");
}

}  // namespace

Mlp mlp_init(Rng& rng) {
    Mlp mlp;
    auto init_layer = [&rng](std::vector<double>& w, std::vector<double>& b, int rows, int cols) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        w.resize(static_cast<std::size_t>(rows) * cols);
        for (auto& v : w) v = (rng.uniform() * 2.0 - 1.0) * bound;
        b.assign(static_cast<std::size_t>(rows), 0.0);
    };
    init_layer(mlp.w1, mlp.b1, kHidden, kIn);
    init_layer(mlp.w2, mlp.b2, kHidden, kHidden);
    init_layer(mlp.w3, mlp.b3, kOut, kHidden);
    return mlp;
}

Scores mlp_forward(const Mlp& mlp, const FeatureVector& input) {
    check_finite_input(input);
    return forward_cached(mlp, input).out;
}

double mlp_loss(const Mlp& mlp, const TrainBatch& batch) {
    if (batch.inputs.empty() || batch.inputs.size() != batch.targets.size())
        throw std::invalid_argument("train batch must be nonempty with matching targets");
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.inputs.size(); ++b) {
        const Scores out = mlp_forward(mlp, batch.inputs[b]);
        for (int k = 0; k < kOut; ++k) {
            const double e = out[k] - batch.targets[b][k];
            loss += e * e;
        }
    }
    return loss / static_cast<double>(batch.inputs.size());
}

MlpGradient mlp_gradient(const Mlp& mlp, const TrainBatch& batch, double* loss) {
    if (batch.inputs.empty() || batch.inputs.size() != batch.targets.size())
        throw std::invalid_argument("train batch must be nonempty with matching targets");

    MlpGradient g;
    g.w1.assign(mlp.w1.size(), 0.0);
    g.b1.assign(mlp.b1.size(), 0.0);
    g.w2.assign(mlp.w2.size(), 0.0);
    g.b2.assign(mlp.b2.size(), 0.0);
    g.w3.assign(mlp.w3.size(), 0.0);
    g.b3.assign(mlp.b3.size(), 0.0);

    const double inv_n = 1.0 / static_cast<double>(batch.inputs.size());
    double total = 0.0;

    std::array<double, kHidden> dh2, dz2, dh1, dz1;
    for (std::size_t b = 0; b < batch.inputs.size(); ++b) {
        const FeatureVector& x = batch.inputs[b];
        check_finite_input(x);
        const ForwardCache c = forward_cached(mlp, x);

        Scores dout;
        for (int k = 0; k < kOut; ++k) {
            const double e = c.out[k] - batch.targets[b][k];
            total += e * e;
            dout[k] = 2.0 * e * inv_n;
        }

        dh2.fill(0.0);
        for (int k = 0; k < kOut; ++k) {
            const double d = dout[k];
            double* grow = &g.w3[static_cast<std::size_t>(k) * kHidden];
            const double* wrow = &mlp.w3[static_cast<std::size_t>(k) * kHidden];
            for (int j = 0; j < kHidden; ++j) {
                grow[j] += d * c.h2[j];
                dh2[j] += d * wrow[j];
            }
            g.b3[k] += d;
        }

        dh1.fill(0.0);
        for (int i = 0; i < kHidden; ++i) {
            const double d = c.z2[i] > 0 ? dh2[i] : 0.0;
            dz2[i] = d;
            if (d == 0.0) continue;
            double* grow = &g.w2[static_cast<std::size_t>(i) * kHidden];
            const double* wrow = &mlp.w2[static_cast<std::size_t>(i) * kHidden];
            for (int j = 0; j < kHidden; ++j) {
                grow[j] += d * c.h1[j];
                dh1[j] += d * wrow[j];
            }
            g.b2[i] += d;
        }

        for (int i = 0; i < kHidden; ++i) {
            const double d = c.z1[i] > 0 ? dh1[i] : 0.0;
            dz1[i] = d;
            if (d == 0.0) continue;
            double* grow = &g.w1[static_cast<std::size_t>(i) * kIn];
            for (int j = 0; j < kIn; ++j) grow[j] += d * x[j];
            g.b1[i] += d;
        }
    }

    if (loss) *loss = total * inv_n;
    return g;
}

double mlp_train_batch(Mlp& mlp, const TrainBatch& batch, double step_size) {
    if (step_size <= 0) throw std::invalid_argument("step_size must be positive");
    double loss = 0.0;
    const MlpGradient g = mlp_gradient(mlp, batch, &loss);
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss (" << loss << ") on batch of " << batch.inputs.size();
        throw std::runtime_error(msg.str());
    }
    auto apply = [step_size](std::vector<double>& p, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= step_size * grad[i];
    };
    apply(mlp.w1, g.w1);
    apply(mlp.b1, g.b1);
    apply(mlp.w2, g.w2);
    apply(mlp.b2, g.b2);
    apply(mlp.w3, g.w3);
    apply(mlp.b3, g.b3);
    return loss;
}

Action greedy_action(const Scores& scores) {
    int best = 0;
    for (int i = 1; i < kOut; ++i)
        if (scores[i] > scores[best]) best = i;
    return kActions[best];
}

namespace {

LinearModel fit_lda(const std::vector<std::pair<FeatureVector, int>>& samples) {
    LinearModel m;
    m.kind = LinearKind::Lda;

    std::array<std::size_t, 9> counts{};
    for (const auto& [x, label] : samples) {
        counts[label]++;
        for (int j = 0; j < 15; ++j) m.means[label][j] += x[j];
    }
    const double n = static_cast<double>(samples.size());
    for (int c = 0; c < 9; ++c) {
        m.present[c] = counts[c] > 0;
        m.priors[c] = counts[c] / n;
        if (counts[c] > 0)
            for (int j = 0; j < 15; ++j) m.means[c][j] /= static_cast<double>(counts[c]);
    }

    // pooled within-class covariance
    std::array<double, 225> cov{};
    for (const auto& [x, label] : samples) {
        std::array<double, 15> d;
        for (int j = 0; j < 15; ++j) d[j] = x[j] - m.means[label][j];
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 15; ++j) cov[i * 15 + j] += d[i] * d[j];
    }
    for (auto& v : cov) v /= n;

    double trace = 0.0;
    for (int i = 0; i < 15; ++i) trace += cov[i * 15 + i];
    // absolute floor keeps zero-variance data (e.g. duplicated points) invertible
    const double shrink = std::max(1e-3 * trace / 15.0, 1e-8);
    for (int i = 0; i < 15; ++i) cov[i * 15 + i] += shrink;

    // Gauss-Jordan inversion
    std::array<double, 225> inv{};
    for (int i = 0; i < 15; ++i) inv[i * 15 + i] = 1.0;
    for (int col = 0; col < 15; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 15; ++r)
            if (std::abs(cov[r * 15 + col]) > std::abs(cov[pivot * 15 + col])) pivot = r;
        if (std::abs(cov[pivot * 15 + col]) < 1e-12)
            throw std::runtime_error("singular covariance matrix after shrinkage");
        if (pivot != col)
            for (int j = 0; j < 15; ++j) {
                std::swap(cov[pivot * 15 + j], cov[col * 15 + j]);
                std::swap(inv[pivot * 15 + j], inv[col * 15 + j]);
            }
        const double p = cov[col * 15 + col];
        for (int j = 0; j < 15; ++j) {
            cov[col * 15 + j] /= p;
            inv[col * 15 + j] /= p;
        }
        for (int r = 0; r < 15; ++r) {
            if (r == col) continue;
            const double f = cov[r * 15 + col];
            if (f == 0.0) continue;
            for (int j = 0; j < 15; ++j) {
                cov[r * 15 + j] -= f * cov[col * 15 + j];
                inv[r * 15 + j] -= f * inv[col * 15 + j];
            }
        }
    }
    m.cov_inv = inv;
    return m;
}

LinearModel fit_logreg(const std::vector<std::pair<FeatureVector, int>>& samples) {
    LinearModel m;
    m.kind = LinearKind::LogisticRegression;
    for (const auto& [x, label] : samples) m.present[label] = true;

    constexpr int kEpochs = 200;
    constexpr double kStep = 1e-2;
    const double inv_n = 1.0 / static_cast<double>(samples.size());

    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        std::array<double, 135> gw{};
        std::array<double, 9> gb{};
        for (const auto& [x, label] : samples) {
            std::array<double, 9> logits;
            for (int c = 0; c < 9; ++c) {
                double z = m.bias[c];
                for (int j = 0; j < 15; ++j) z += m.weights[c * 15 + j] * x[j];
                logits[c] = z;
            }
            double mx = logits[0];
            for (double z : logits) mx = std::max(mx, z);
            double sum = 0.0;
            std::array<double, 9> p;
            for (int c = 0; c < 9; ++c) {
                p[c] = std::exp(logits[c] - mx);
                sum += p[c];
            }
            for (int c = 0; c < 9; ++c) {
                const double g = (p[c] / sum - (c == label ? 1.0 : 0.0)) * inv_n;
                for (int j = 0; j < 15; ++j) gw[c * 15 + j] += g * x[j];
                gb[c] += g;
            }
        }
        for (int i = 0; i < 135; ++i) m.weights[i] -= kStep * gw[i];
        for (int c = 0; c < 9; ++c) m.bias[c] -= kStep * gb[c];
    }
    return m;
}

}  // namespace

LinearModel linear_fit(LinearKind kind, const std::vector<std::pair<FeatureVector, int>>& samples) {
    if (samples.empty()) throw InsufficientClasses();
    std::array<bool, 9> seen{};
    int distinct = 0;
    for (const auto& [x, label] : samples) {
        if (label < 0 || label > 8) throw std::invalid_argument("label index out of range");
        if (!seen[label]) {
            seen[label] = true;
            ++distinct;
        }
    }
    if (distinct < 2) throw InsufficientClasses();
    return kind == LinearKind::Lda ? fit_lda(samples) : fit_logreg(samples);
}

Scores linear_scores(const LinearModel& model, const FeatureVector& features) {
    Scores s;
    s.fill(-std::numeric_limits<double>::infinity());
    if (model.kind == LinearKind::Lda) {
        for (int c = 0; c < 9; ++c) {
            if (!model.present[c]) continue;
            // x' Sigma^-1 mu_c - 1/2 mu_c' Sigma^-1 mu_c + log prior_c
            std::array<double, 15> sm{};
            for (int i = 0; i < 15; ++i)
                for (int j = 0; j < 15; ++j) sm[i] += model.cov_inv[i * 15 + j] * model.means[c][j];
            double score = std::log(model.priors[c]);
            for (int i = 0; i < 15; ++i) score += (features[i] - 0.5 * model.means[c][i]) * sm[i];
            s[c] = score;
        }
    } else {
        for (int c = 0; c < 9; ++c) {
            if (!model.present[c]) continue;
            double z = model.bias[c];
            for (int j = 0; j < 15; ++j) z += model.weights[c * 15 + j] * features[j];
            s[c] = z;
        }
    }
    return s;
}

Action linear_predict(const LinearModel& model, const FeatureVector& features) {
    return greedy_action(linear_scores(model, features));
}

namespace {

json mlp_to_json(const Mlp& m) {
    json j;
    j["format"] = 1;
    j["kind"] = "mlp";
    j["arch"] = {kIn, kHidden, kHidden, kOut};
    j["params"] = {{"w1", m.w1}, {"b1", m.b1}, {"w2", m.w2},
                   {"b2", m.b2}, {"w3", m.w3}, {"b3", m.b3}};
    return j;
}

json linear_to_json(const LinearModel& m) {
    json j;
    j["format"] = 1;
    j["kind"] = m.kind == LinearKind::Lda ? "lda" : "logreg";
    j["arch"] = {15, 9};
    json p;
    p["present"] = m.present;
    p["means"] = m.means;
    p["cov_inv"] = m.cov_inv;
    p["priors"] = m.priors;
    p["weights"] = m.weights;
    p["bias"] = m.bias;
    j["params"] = std::move(p);
    return j;
}

template <typename T, std::size_t N>
void read_array(const json& j, std::array<T, N>& out) {
    if (j.size() != N) throw ModelFormatError("parameter array size mismatch");
    for (std::size_t i = 0; i < N; ++i) out[i] = j[i].get<T>();
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    const json j = std::holds_alternative<Mlp>(model) ? mlp_to_json(std::get<Mlp>(model))
                                                      : linear_to_json(std::get<LinearModel>(model));
    out << j.dump() << '\n';
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }
    if (!j.contains("format") || j["format"].get<int>() != 1)
        throw ModelFormatError("unsupported model format version");
    const std::string kind = j.at("kind").get<std::string>();
    const auto& params = j.at("params");
    if (kind == "mlp") {
        if (j.at("arch") != json({kIn, kHidden, kHidden, kOut}))
            throw ModelFormatError("architecture mismatch: expected [15,64,64,9]");
        Mlp m;
        m.w1 = params.at("w1").get<std::vector<double>>();
        m.b1 = params.at("b1").get<std::vector<double>>();
        m.w2 = params.at("w2").get<std::vector<double>>();
        m.b2 = params.at("b2").get<std::vector<double>>();
        m.w3 = params.at("w3").get<std::vector<double>>();
        m.b3 = params.at("b3").get<std::vector<double>>();
        if (m.w1.size() != kHidden * kIn || m.b1.size() != kHidden ||
            m.w2.size() != kHidden * kHidden || m.b2.size() != kHidden ||
            m.w3.size() != kOut * kHidden || m.b3.size() != kOut)
            throw ModelFormatError("architecture mismatch: parameter shapes");
        return m;
    }
    if (kind == "lda" || kind == "logreg") {
        if (j.at("arch") != json({15, 9})) throw ModelFormatError("architecture mismatch: expected [15,9]");
        LinearModel m;
        m.kind = kind == "lda" ? LinearKind::Lda : LinearKind::LogisticRegression;
        read_array(params.at("present"), m.present);
        for (int c = 0; c < 9; ++c) read_array(params.at("means").at(c), m.means[c]);
        read_array(params.at("cov_inv"), m.cov_inv);
        read_array(params.at("priors"), m.priors);
        read_array(params.at("weights"), m.weights);
        read_array(params.at("bias"), m.bias);
        return m;
    }
    throw ModelFormatError("unknown model kind: " + kind);
}

}  // namespace rtlab
