#include "dftforge/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace dftforge {

namespace {

void affine_forward(const Mat& X, const DenseLayer& l, Mat& out) {
    matmul_abt(X, l.W, out); // out[i][j] = dot(x_i, W_j)
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* oi = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) oi[j] += l.b[j];
    }
}

Mat relu(const Mat& m) {
    Mat out = m;
    for (double& v : out.a) v = v > 0.0 ? v : 0.0;
    return out;
}

void init_layer(DenseLayer& l, DetRng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.W.cols));
    for (double& w : l.W.a) w = rng.uniform(-bound, bound);
    // biases stay zero
}

void add_bias_grad(const Mat& d, std::vector<double>& db) {
    db.assign(d.cols, 0.0);
    for (std::size_t i = 0; i < d.rows; ++i) {
        const double* di = d.row(i);
        for (std::size_t j = 0; j < d.cols; ++j) db[j] += di[j];
    }
}

} // namespace

std::string AutoencoderConfig::to_json() const {
    json j = {{"input_dim", input_dim},   {"hidden_dim", hidden_dim},
              {"embed_dim", embed_dim},   {"label_dim", label_dim},
              {"alpha", alpha},           {"beta", beta},
              {"margin", margin},         {"lr", lr},
              {"adam_beta1", adam_beta1}, {"adam_beta2", adam_beta2},
              {"adam_eps", adam_eps},     {"batch_size", batch_size},
              {"epochs", epochs},         {"seed", seed}};
    return j.dump();
}

AutoencoderConfig AutoencoderConfig::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("autoencoder config: malformed JSON");
    AutoencoderConfig c;
    c.input_dim = j.value("input_dim", c.input_dim);
    c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.label_dim = j.value("label_dim", c.label_dim);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.margin = j.value("margin", c.margin);
    c.lr = j.value("lr", c.lr);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    return c;
}

void Gradients::require_finite() const {
    for (const DenseLayer* l : {&enc1, &enc2, &dec1, &dec2, &cls}) {
        l->W.require_finite("gradient");
        for (double v : l->b)
            if (!std::isfinite(v)) throw Error("gradient: non-finite bias value");
    }
}

AutoencoderModel AutoencoderModel::init(const AutoencoderConfig& cfg) {
    AutoencoderModel m;
    m.cfg = cfg;
    m.enc1 = DenseLayer::make(cfg.hidden_dim, cfg.input_dim);
    m.enc2 = DenseLayer::make(cfg.embed_dim, cfg.hidden_dim);
    m.dec1 = DenseLayer::make(cfg.hidden_dim, cfg.embed_dim);
    m.dec2 = DenseLayer::make(cfg.input_dim, cfg.hidden_dim);
    m.cls = DenseLayer::make(cfg.label_dim, cfg.embed_dim);
    DetRng rng(cfg.seed);
    init_layer(m.enc1, rng);
    init_layer(m.enc2, rng);
    init_layer(m.dec1, rng);
    init_layer(m.dec2, rng);
    init_layer(m.cls, rng);
    return m;
}

std::size_t AutoencoderModel::param_count() const {
    return enc1.param_count() + enc2.param_count() + dec1.param_count() +
           dec2.param_count() + cls.param_count();
}

ForwardCache AutoencoderModel::forward(const Mat& X) const {
    X.require_shape(X.rows, cfg.input_dim, "forward input");
    X.require_finite("forward input");
    ForwardCache fc;
    affine_forward(X, enc1, fc.h1_pre);
    fc.h1 = relu(fc.h1_pre);
    affine_forward(fc.h1, enc2, fc.z);
    affine_forward(fc.z, dec1, fc.h2_pre);
    fc.h2 = relu(fc.h2_pre);
    affine_forward(fc.h2, dec2, fc.x_hat);
    affine_forward(fc.z, cls, fc.logits);

    // softmax with max subtraction
    fc.probs = Mat(fc.logits.rows, fc.logits.cols);
    for (std::size_t i = 0; i < fc.logits.rows; ++i) {
        const double* li = fc.logits.row(i);
        double* pi = fc.probs.row(i);
        double mx = li[0];
        for (std::size_t j = 1; j < fc.logits.cols; ++j) mx = std::max(mx, li[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < fc.logits.cols; ++j) {
            pi[j] = std::exp(li[j] - mx);
            sum += pi[j];
        }
        for (std::size_t j = 0; j < fc.logits.cols; ++j) pi[j] /= sum;
    }

    fc.z_norm = Mat(fc.z.rows, fc.z.cols);
    fc.z_row_norm.assign(fc.z.rows, 0.0);
    for (std::size_t i = 0; i < fc.z.rows; ++i) {
        const double* zi = fc.z.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < fc.z.cols; ++j) s += zi[j] * zi[j];
        fc.z_row_norm[i] = std::sqrt(s);
        if (fc.z_row_norm[i] > 0.0) {
            double* ni = fc.z_norm.row(i);
            for (std::size_t j = 0; j < fc.z.cols; ++j) ni[j] = zi[j] / fc.z_row_norm[i];
        }
    }

    fc.z.require_finite("embedding");
    fc.x_hat.require_finite("reconstruction");
    fc.logits.require_finite("logits");
    return fc;
}

std::vector<double> AutoencoderModel::encode(const std::vector<double>& x) const {
    if (x.size() != cfg.input_dim)
        throw Error("encode: expected " + std::to_string(cfg.input_dim) + " features");
    Mat X(1, cfg.input_dim);
    std::copy(x.begin(), x.end(), X.a.begin());
    Mat h1p, z;
    affine_forward(X, enc1, h1p);
    Mat h1 = relu(h1p);
    affine_forward(h1, enc2, z);
    z.require_finite("embedding");
    return z.a;
}

double reconstruction_loss(const Mat& X, const Mat& X_hat) {
    if (!X.same_shape(X_hat)) throw Error("reconstruction_loss: shape mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < X.a.size(); ++i) {
        const double d = X.a[i] - X_hat.a[i];
        total += d * d;
    }
    return total / static_cast<double>(X.rows);
}

double classification_loss(const Mat& logits, const Mat& Y) {
    if (!logits.same_shape(Y)) throw Error("classification_loss: shape mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* li = logits.row(i);
        const double* yi = Y.row(i);
        double mx = li[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, li[j]);
        double lse = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(li[j] - mx);
        lse = std::log(lse) + mx; // log sum exp
        for (std::size_t j = 0; j < logits.cols; ++j)
            if (yi[j] != 0.0) total -= yi[j] * (li[j] - lse);
    }
    return total / static_cast<double>(logits.rows);
}

double contrastive_loss(const Mat& Z, const Mat& Y, double margin) {
    if (Z.rows != Y.rows) throw Error("contrastive_loss: row mismatch");
    if (Z.rows < 2) throw Error("contrastive_loss: needs at least 2 samples");
    if (margin <= 0) throw Error("contrastive_loss: margin must be positive");
    const std::size_t B = Z.rows;

    Mat zn(B, Z.cols);
    for (std::size_t i = 0; i < B; ++i) {
        const double* zi = Z.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < Z.cols; ++j) s += zi[j] * zi[j];
        const double n = std::sqrt(s);
        if (n == 0.0) throw Error("contrastive_loss: zero-norm embedding row " + std::to_string(i));
        double* oi = zn.row(i);
        for (std::size_t j = 0; j < Z.cols; ++j) oi[j] = zi[j] / n;
    }

    auto same_label = [&](std::size_t p, std::size_t q) {
        for (std::size_t j = 0; j < Y.cols; ++j)
            if (Y.at(p, j) != Y.at(q, j)) return false;
        return true;
    };

    double total = 0.0;
    for (std::size_t p = 0; p + 1 < B; ++p) {
        for (std::size_t q = p + 1; q < B; ++q) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < Z.cols; ++j) {
                const double d = zn.at(p, j) - zn.at(q, j);
                d2 += d * d;
            }
            if (same_label(p, q)) {
                total += d2;
            } else {
                const double gap = margin - std::sqrt(d2);
                if (gap > 0.0) total += gap * gap;
            }
        }
    }
    const double n_pairs = static_cast<double>(B * (B - 1) / 2);
    return total / n_pairs;
}

LossBreakdown AutoencoderModel::joint_loss(const Batch& batch, ForwardCache* cache) const {
    batch.X.require_shape(batch.X.rows, cfg.input_dim, "batch X");
    batch.Y.require_shape(batch.X.rows, cfg.label_dim, "batch Y");
    if (batch.X.rows < 2) throw Error("joint_loss: batch must have B >= 2");

    ForwardCache fc = forward(batch.X);
    LossBreakdown lb;
    lb.alpha = cfg.alpha;
    lb.beta = cfg.beta;
    lb.l1 = reconstruction_loss(batch.X, fc.x_hat);
    lb.l2 = classification_loss(fc.logits, batch.Y);
    lb.l3 = contrastive_loss(fc.z, batch.Y, cfg.margin);
    lb.total = lb.l1 + cfg.alpha * lb.l2 + cfg.beta * lb.l3;
    if (!std::isfinite(lb.total))
        throw Error("joint_loss: non-finite loss (l1=" + std::to_string(lb.l1) +
                    " l2=" + std::to_string(lb.l2) + " l3=" + std::to_string(lb.l3) + ")");
    if (cache) *cache = std::move(fc);
    return lb;
}

Gradients AutoencoderModel::backward(const Batch& batch, const ForwardCache& fc) const {
    const std::size_t B = batch.X.rows;
    const double Bd = static_cast<double>(B);
    Gradients g;

    // L1 path: dL1/dx_hat = 2 (x_hat - x) / B
    Mat d_xhat(B, cfg.input_dim);
    for (std::size_t i = 0; i < d_xhat.a.size(); ++i)
        d_xhat.a[i] = 2.0 * (fc.x_hat.a[i] - batch.X.a[i]) / Bd;

    g.dec2.W = Mat();
    matmul_atb(d_xhat, fc.h2, g.dec2.W);
    add_bias_grad(d_xhat, g.dec2.b);
    Mat d_h2;
    matmul_ab(d_xhat, dec2.W, d_h2);
    for (std::size_t i = 0; i < d_h2.a.size(); ++i)
        if (fc.h2_pre.a[i] <= 0.0) d_h2.a[i] = 0.0;

    matmul_atb(d_h2, fc.z, g.dec1.W);
    add_bias_grad(d_h2, g.dec1.b);
    Mat d_z_dec;
    matmul_ab(d_h2, dec1.W, d_z_dec);

    // L2 path: dL2/dlogits = alpha * (P - Y) / B
    Mat d_logits(B, cfg.label_dim);
    for (std::size_t i = 0; i < d_logits.a.size(); ++i)
        d_logits.a[i] = cfg.alpha * (fc.probs.a[i] - batch.Y.a[i]) / Bd;
    matmul_atb(d_logits, fc.z, g.cls.W);
    add_bias_grad(d_logits, g.cls.b);
    Mat d_z_cls;
    matmul_ab(d_logits, cls.W, d_z_cls);

    // L3 path: gradient w.r.t. normalized embeddings, then through the
    // normalization Jacobian (I - zn zn^T)/||z||.
    const double n_pairs = static_cast<double>(B * (B - 1) / 2);
    Mat d_zn(B, cfg.embed_dim);
    auto same_label = [&](std::size_t p, std::size_t q) {
        for (std::size_t j = 0; j < cfg.label_dim; ++j)
            if (batch.Y.at(p, j) != batch.Y.at(q, j)) return false;
        return true;
    };
    std::vector<double> diff(cfg.embed_dim);
    for (std::size_t p = 0; p + 1 < B; ++p) {
        for (std::size_t q = p + 1; q < B; ++q) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
                diff[j] = fc.z_norm.at(p, j) - fc.z_norm.at(q, j);
                d2 += diff[j] * diff[j];
            }
            double coeff = 0.0;
            if (same_label(p, q)) {
                coeff = 2.0 / n_pairs;
            } else {
                const double dist = std::sqrt(d2);
                const double gap = cfg.margin - dist;
                // dist == 0 with different labels: direction undefined,
                // subgradient 0 is used.
                if (gap > 0.0 && dist > 0.0) coeff = -2.0 * gap / (dist * n_pairs);
            }
            if (coeff != 0.0) {
                for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
                    d_zn.at(p, j) += coeff * diff[j];
                    d_zn.at(q, j) -= coeff * diff[j];
                }
            }
        }
    }
    Mat d_z_con(B, cfg.embed_dim);
    for (std::size_t i = 0; i < B; ++i) {
        const double r = fc.z_row_norm[i];
        if (r == 0.0) throw Error("backward: zero-norm embedding row");
        const double* dn = d_zn.row(i);
        const double* zn = fc.z_norm.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < cfg.embed_dim; ++j) dot += dn[j] * zn[j];
        double* out = d_z_con.row(i);
        for (std::size_t j = 0; j < cfg.embed_dim; ++j)
            out[j] = (dn[j] - dot * zn[j]) / r;
    }

    // Combined embedding gradient.
    Mat d_z(B, cfg.embed_dim);
    for (std::size_t i = 0; i < d_z.a.size(); ++i)
        d_z.a[i] = d_z_dec.a[i] + d_z_cls.a[i] + cfg.beta * d_z_con.a[i];

    matmul_atb(d_z, fc.h1, g.enc2.W);
    add_bias_grad(d_z, g.enc2.b);
    Mat d_h1;
    matmul_ab(d_z, enc2.W, d_h1);
    for (std::size_t i = 0; i < d_h1.a.size(); ++i)
        if (fc.h1_pre.a[i] <= 0.0) d_h1.a[i] = 0.0;

    matmul_atb(d_h1, batch.X, g.enc1.W);
    add_bias_grad(d_h1, g.enc1.b);

    g.require_finite();
    return g;
}

// --- training ---------------------------------------------------------------

namespace {

struct AdamState {
    DenseLayer m, v; // first/second moment, same shapes as the parameters

    static AdamState make_like(const DenseLayer& l) {
        AdamState s;
        s.m = DenseLayer::make(l.W.rows, l.W.cols);
        s.v = DenseLayer::make(l.W.rows, l.W.cols);
        return s;
    }
};

void adam_step(DenseLayer& p, const DenseLayer& g, AdamState& s,
               const AutoencoderConfig& c, double bias1, double bias2) {
    auto upd = [&](double& pv, double gv, double& mv, double& vv) {
        mv = c.adam_beta1 * mv + (1.0 - c.adam_beta1) * gv;
        vv = c.adam_beta2 * vv + (1.0 - c.adam_beta2) * gv * gv;
        const double mh = mv / bias1;
        const double vh = vv / bias2;
        pv -= c.lr * mh / (std::sqrt(vh) + c.adam_eps);
    };
    for (std::size_t i = 0; i < p.W.a.size(); ++i) upd(p.W.a[i], g.W.a[i], s.m.W.a[i], s.v.W.a[i]);
    for (std::size_t i = 0; i < p.b.size(); ++i) upd(p.b[i], g.b[i], s.m.b[i], s.v.b[i]);
}

} // namespace

TrainResult train(const std::vector<TrainSample>& corpus, const AutoencoderConfig& cfg) {
    TrainResult res;
    if (corpus.empty()) throw Error("train: empty corpus");

    std::vector<const TrainSample*> usable;
    std::size_t dropped = 0;
    for (const auto& s : corpus) {
        if (s.x.size() != cfg.input_dim) throw Error("train: sample feature width mismatch");
        bool all_zero = std::all_of(s.x.begin(), s.x.end(), [](double v) { return v == 0.0; });
        if (all_zero) {
            ++dropped;
            continue;
        }
        usable.push_back(&s);
    }
    if (dropped > 0)
        res.warnings.push_back("dropped " + std::to_string(dropped) +
                               " zero-feature (all-OOV) samples from training");
    if (usable.size() < 2) throw Error("train: fewer than 2 usable samples");

    std::array<bool, 4> seen{};
    for (const auto* s : usable)
        for (std::size_t i = 0; i < 4; ++i)
            if (s->y[i]) seen[i] = true;
    if (!(seen[0] && seen[1] && seen[2] && seen[3]))
        res.warnings.push_back(
            "training corpus does not cover all four violation types; "
            "the classifier head cannot learn missing classes");

    AutoencoderModel model = AutoencoderModel::init(cfg);
    AdamState s_enc1 = AdamState::make_like(model.enc1), s_enc2 = AdamState::make_like(model.enc2),
              s_dec1 = AdamState::make_like(model.dec1), s_dec2 = AdamState::make_like(model.dec2),
              s_cls = AdamState::make_like(model.cls);

    DetRng rng(cfg.seed);
    std::vector<std::size_t> order(usable.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    AutoencoderModel checkpoint = model;
    std::size_t adam_t = 0;
    bool skipped_tail_logged = false;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        LossBreakdown sum;
        std::size_t n_batches = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bsz = std::min(cfg.batch_size, order.size() - start);
            if (bsz < 2) {
                if (!skipped_tail_logged) {
                    res.warnings.push_back("skipping size-1 tail batches (contrastive term needs pairs)");
                    skipped_tail_logged = true;
                }
                continue;
            }
            Batch batch;
            batch.X = Mat(bsz, cfg.input_dim);
            batch.Y = Mat(bsz, cfg.label_dim);
            for (std::size_t r = 0; r < bsz; ++r) {
                const TrainSample* smp = usable[order[start + r]];
                std::copy(smp->x.begin(), smp->x.end(), batch.X.row(r));
                for (std::size_t j = 0; j < cfg.label_dim && j < 4; ++j)
                    batch.Y.at(r, j) = smp->y[j];
            }

            LossBreakdown lb;
            ForwardCache fc;
            Gradients g;
            try {
                lb = model.joint_loss(batch, &fc);
                g = model.backward(batch, fc);
            } catch (const Error&) {
                res.diverged = true;
                res.model = checkpoint;
                res.warnings.push_back("training diverged at epoch " + std::to_string(epoch) +
                                       "; returning last epoch checkpoint");
                return res;
            }

            ++adam_t;
            const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam_t));
            const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam_t));
            adam_step(model.enc1, g.enc1, s_enc1, cfg, bias1, bias2);
            adam_step(model.enc2, g.enc2, s_enc2, cfg, bias1, bias2);
            adam_step(model.dec1, g.dec1, s_dec1, cfg, bias1, bias2);
            adam_step(model.dec2, g.dec2, s_dec2, cfg, bias1, bias2);
            adam_step(model.cls, g.cls, s_cls, cfg, bias1, bias2);

            sum.l1 += lb.l1;
            sum.l2 += lb.l2;
            sum.l3 += lb.l3;
            sum.total += lb.total;
            ++n_batches;
        }

        EpochLog el;
        el.epoch = epoch;
        if (n_batches > 0) {
            el.loss.l1 = sum.l1 / n_batches;
            el.loss.l2 = sum.l2 / n_batches;
            el.loss.l3 = sum.l3 / n_batches;
            el.loss.total = sum.total / n_batches;
        }
        el.loss.alpha = cfg.alpha;
        el.loss.beta = cfg.beta;
        res.log.push_back(el);
        checkpoint = model;
    }

    res.model = std::move(model);
    return res;
}

std::string training_log_csv(const std::vector<EpochLog>& log) {
    std::ostringstream ss;
    ss << "epoch,l1,l2,l3,total\n";
    char buf[160];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", e.epoch,
                      e.loss.l1, e.loss.l2, e.loss.l3, e.loss.total);
        ss << buf;
    }
    return ss.str();
}

// --- persistence -------------------------------------------------------------

namespace {

json layer_to_json(const DenseLayer& l) {
    return {{"rows", l.W.rows}, {"cols", l.W.cols}, {"w", l.W.a}, {"b", l.b}};
}

DenseLayer layer_from_json(const json& j) {
    DenseLayer l;
    l.W.rows = j.at("rows").get<std::size_t>();
    l.W.cols = j.at("cols").get<std::size_t>();
    l.W.a = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    if (l.W.a.size() != l.W.rows * l.W.cols || l.b.size() != l.W.rows)
        throw Error("autoencoder model: layer shape mismatch");
    return l;
}

} // namespace

std::string AutoencoderModel::to_json() const {
    json root = {{"version", 1},
                 {"kind", "autoencoder-model"},
                 {"config", json::parse(cfg.to_json())},
                 {"enc1", layer_to_json(enc1)},
                 {"enc2", layer_to_json(enc2)},
                 {"dec1", layer_to_json(dec1)},
                 {"dec2", layer_to_json(dec2)},
                 {"cls", layer_to_json(cls)}};
    return root.dump() + "\n";
}

AutoencoderModel AutoencoderModel::from_json(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw Error("autoencoder model: malformed JSON");
    if (root.value("version", 0) != 1 || root.value("kind", "") != "autoencoder-model")
        throw Error("autoencoder model: unsupported version or kind");
    AutoencoderModel m;
    m.cfg = AutoencoderConfig::from_json(root.at("config").dump());
    m.enc1 = layer_from_json(root.at("enc1"));
    m.enc2 = layer_from_json(root.at("enc2"));
    m.dec1 = layer_from_json(root.at("dec1"));
    m.dec2 = layer_from_json(root.at("dec2"));
    m.cls = layer_from_json(root.at("cls"));
    if (m.enc2.W.rows != m.cfg.embed_dim || m.dec2.W.rows != m.cfg.input_dim ||
        m.cls.W.rows != m.cfg.label_dim)
        throw Error("autoencoder model: layer dims inconsistent with config");
    return m;
}

} // namespace dftforge
