// Embedding + contextualiser + per-stage MLP heads with biaffine/triaffine forms.
//
// Positions 0..n+1 carry <bos>, the tokens, <eos>. The encoder yields forward
// states F and backward states B; token state h_i = [F_i; B_i] and boundary
// state c_i = [F_i; B_{i+1}] for i = 0..n.

#include <array>
#include <cmath>

#include "scorers.hpp"

namespace ssa {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd with_bias_row(const MatrixXd& r) {
  MatrixXd out(r.rows() + 1, r.cols());
  out.topRows(r.rows()) = r;
  out.bottomRows(1).setOnes();
  return out;
}

// The MLP heads of one stage. Index order matters only for naming.
enum HeadId {
  kArcHead,
  kArcMod,
  kSibSib,
  kSibHead,
  kSibMod,
  kSpanHead,
  kSpanLeft,
  kSpanRight,
  kLabelHead,
  kLabelMod,
  kHeadCount
};

constexpr std::array<const char*, kHeadCount> kHeadNames = {
    "arc_head", "arc_mod",   "sib_sib",    "sib_head",   "sib_mod",
    "span_head", "span_left", "span_right", "label_head", "label_mod"};

bool reads_boundaries(int head) { return head == kSpanLeft || head == kSpanRight; }

std::string stage_prefix(Stage s) { return s == Stage::expression ? "s1." : "s2."; }

struct LstmTrace {
  MatrixXd in;  // input columns in time order of the sequence (not of the scan)
  MatrixXd i, f, o, g, c, h;
  bool reverse = false;
};

struct NeuralReps : Representations {
  std::vector<int> ids;      // per position 0..n+1
  std::vector<bool> in_expr;  // per position 0..n+1
  MatrixXd x;                // emb_dim x (n+2)
  // window encoder
  MatrixXd f_pre_in, b_pre_in;
  // bilstm encoder: layer 1 fwd/bwd, layer 2 fwd/bwd
  std::array<LstmTrace, 4> lstm;
  MatrixXd F, B;  // hidden x (n+2)
  MatrixXd H, C;  // 2 hidden x (n+1)
  std::array<MatrixXd, kHeadCount> r;  // activations, d x (n+1)
  std::array<MatrixXd, kHeadCount> a;  // with bias row
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

class NeuralScorer final : public Scorer {
 public:
  NeuralScorer(const Config& config, const Vocabulary& vocab) : Scorer(config, vocab) {
    const int D = config_.emb_dim, Hd = config_.hidden_dim;
    params_.add("emb", D, vocab_.size());
    params_.add("expr_flag", D, 1);
    if (config_.encoder == EncoderKind::window) {
      params_.add("enc.fwd.W", Hd, 2 * D);
      params_.add("enc.fwd.b", Hd, 1);
      params_.add("enc.bwd.W", Hd, 2 * D);
      params_.add("enc.bwd.b", Hd, 1);
    } else {
      for (int layer = 0; layer < 2; ++layer) {
        const int in = layer == 0 ? D : 2 * Hd;
        for (const char* dir : {"fwd", "bwd"}) {
          const std::string p = "enc.l" + std::to_string(layer + 1) + "." + dir;
          params_.add(p + ".W", 4 * Hd, in + Hd);
          params_.add(p + ".b", 4 * Hd, 1);
        }
      }
    }
    for (Stage s : {Stage::expression, Stage::role}) {
      const std::string p = stage_prefix(s);
      for (int k = 0; k < kHeadCount; ++k) {
        params_.add(p + kHeadNames[k] + ".W", head_dim(k), 2 * Hd);
        params_.add(p + kHeadNames[k] + ".b", head_dim(k), 1);
      }
      const int a = config_.arc_dim + 1, sb = config_.sib_dim + 1, sp = config_.span_dim + 1,
                l = config_.label_dim + 1;
      const int labels = static_cast<int>(stage_labels(s).size());
      params_.add(p + "arc.U", a, a);
      params_.add(p + "sib.U", sb * sb, sb);
      params_.add(p + "span_left.U", sp, sp);
      params_.add(p + "span_right.U", sp, sp);
      params_.add(p + "label.U", l * labels, l);
    }
  }

  std::unique_ptr<Representations> encode(const Sentence& sentence, Stage stage,
                                          const SpanList& expression) const override {
    const int n = sentence.size();
    expects(n >= 1, "cannot encode an empty sentence");
    auto reps = std::make_unique<NeuralReps>();
    reps->n = n;
    reps->stage = stage;
    const int T = n + 2;
    reps->ids.assign(T, Vocabulary::kUnknown);
    reps->in_expr.assign(T, false);
    reps->ids[0] = Vocabulary::kBegin;
    reps->ids[T - 1] = Vocabulary::kEnd;
    for (int t = 0; t < n; ++t) reps->ids[t + 1] = vocab_.id(sentence.tokens[t]);
    if (stage == Stage::role)
      for (const Span& s : expression) {
        expects(s.start >= 0 && s.end < n && s.start <= s.end, "expression out of bounds");
        for (int t = s.start; t <= s.end; ++t) reps->in_expr[t + 1] = true;
      }

    const MatrixXd& emb = params_["emb"];
    const MatrixXd& flag = params_["expr_flag"];
    reps->x.resize(config_.emb_dim, T);
    for (int p = 0; p < T; ++p) {
      reps->x.col(p) = emb.col(reps->ids[p]);
      if (reps->in_expr[p]) reps->x.col(p) += flag.col(0);
    }

    if (config_.encoder == EncoderKind::window)
      window_forward(*reps);
    else
      bilstm_forward(*reps);

    const int Hd = config_.hidden_dim;
    reps->H.resize(2 * Hd, n + 1);
    reps->C.resize(2 * Hd, n + 1);
    for (int i = 0; i <= n; ++i) {
      reps->H.col(i) << reps->F.col(i), reps->B.col(i);
      reps->C.col(i) << reps->F.col(i), reps->B.col(i + 1);
    }

    const std::string p = stage_prefix(stage);
    for (int k = 0; k < kHeadCount; ++k) {
      const MatrixXd& in = reads_boundaries(k) ? reps->C : reps->H;
      const MatrixXd& W = params_[p + kHeadNames[k] + ".W"];
      const MatrixXd& b = params_[p + kHeadNames[k] + ".b"];
      reps->r[k] = ((W * in).colwise() + b.col(0)).array().tanh().matrix();
      reps->a[k] = with_bias_row(reps->r[k]);
    }
    return reps;
  }

  ScoreSet<double> score_structure(const Representations& base) const override {
    const auto& reps = cast(base);
    const int n = reps.n;
    const std::string p = stage_prefix(reps.stage);
    ScoreSet<double> s(n);
    s.arc = reps.a[kArcHead].transpose() * params_[p + "arc.U"] * reps.a[kArcMod];

    const MatrixXd& U = params_[p + "sib.U"];
    const int d = config_.sib_dim + 1;
    for (int sib = 1; sib <= n; ++sib) {
      MatrixXd M = MatrixXd::Zero(d, d);
      for (int k = 0; k < d; ++k) M += reps.a[kSibSib](k, sib) * U.block(k * d, 0, d, d);
      const MatrixXd table = reps.a[kSibHead].transpose() * M * reps.a[kSibMod];
      for (int h = 0; h <= n; ++h)
        for (int m = 1; m <= n; ++m)
          if ((h < sib && sib < m) || (m < sib && sib < h)) s.sib(h, sib, m) = table(h, m);
    }

    // boundary b x head k
    const MatrixXd left =
        reps.a[kSpanLeft].transpose() * params_[p + "span_left.U"] * reps.a[kSpanHead];
    const MatrixXd right =
        reps.a[kSpanRight].transpose() * params_[p + "span_right.U"] * reps.a[kSpanHead];
    for (int k = 1; k <= n; ++k) {
      for (int i = 1; i <= k; ++i) s.span_left(k, i) = left(i - 1, k);
      for (int j = k; j <= n; ++j) s.span_right(k, j) = right(j, k);
    }
    return s;
  }

  Eigen::MatrixXd score_labels(const Representations& base, const ArcList& arcs) const override {
    const auto& reps = cast(base);
    const MatrixXd logits = label_logits(reps, arcs);
    MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      const double mx = logits.row(k).maxCoeff();
      const double lse = mx + std::log((logits.row(k).array() - mx).exp().sum());
      out.row(k) = logits.row(k).array() - lse;
    }
    return out;
  }

  void backward(const Representations& base, const ScoreSet<double>& w, const ArcList& arcs,
                const Eigen::MatrixXd& label_weights, ParameterSet& grad) const override {
    const auto& reps = cast(base);
    const int n = reps.n;
    expects(w.n == n, "part weights do not match the sentence");
    expects(label_weights.rows() == static_cast<Eigen::Index>(arcs.size()) &&
                (arcs.empty() || label_weights.cols() ==
                                     static_cast<Eigen::Index>(stage_labels(reps.stage).size())),
            "label weights have the wrong shape");
    expects(grad.same_layout(params_), "gradient layout differs from the parameters");
    const std::string p = stage_prefix(reps.stage);
    std::array<MatrixXd, kHeadCount> da;
    for (int k = 0; k < kHeadCount; ++k) da[k] = MatrixXd::Zero(reps.a[k].rows(), n + 1);

    {  // arcs
      MatrixXd G = MatrixXd::Zero(n + 1, n + 1);
      for (int h = 0; h <= n; ++h)
        for (int m = 1; m <= n; ++m)
          if (h != m) G(h, m) = w.arc(h, m);
      const MatrixXd& U = params_[p + "arc.U"];
      grad[p + "arc.U"] += reps.a[kArcHead] * G * reps.a[kArcMod].transpose();
      da[kArcHead] += U * reps.a[kArcMod] * G.transpose();
      da[kArcMod] += U.transpose() * reps.a[kArcHead] * G;
    }

    {  // siblings
      const MatrixXd& U = params_[p + "sib.U"];
      MatrixXd& dU = grad[p + "sib.U"];
      const int d = config_.sib_dim + 1;
      for (int sib = 1; sib <= n; ++sib) {
        MatrixXd G = MatrixXd::Zero(n + 1, n + 1);
        bool any = false;
        for (int h = 0; h <= n; ++h)
          for (int m = 1; m <= n; ++m)
            if ((h < sib && sib < m) || (m < sib && sib < h)) {
              G(h, m) = w.sib(h, sib, m);
              any = any || G(h, m) != 0;
            }
        if (!any) continue;
        MatrixXd M = MatrixXd::Zero(d, d);
        for (int k = 0; k < d; ++k) M += reps.a[kSibSib](k, sib) * U.block(k * d, 0, d, d);
        const MatrixXd dM = reps.a[kSibHead] * G * reps.a[kSibMod].transpose();
        da[kSibHead] += M * reps.a[kSibMod] * G.transpose();
        da[kSibMod] += M.transpose() * reps.a[kSibHead] * G;
        for (int k = 0; k < d; ++k) {
          dU.block(k * d, 0, d, d) += reps.a[kSibSib](k, sib) * dM;
          da[kSibSib](k, sib) += (U.block(k * d, 0, d, d).array() * dM.array()).sum();
        }
      }
    }

    {  // headed spans
      MatrixXd GL = MatrixXd::Zero(n + 1, n + 1), GR = MatrixXd::Zero(n + 1, n + 1);
      for (int k = 1; k <= n; ++k) {
        for (int i = 1; i <= k; ++i) GL(i - 1, k) = w.span_left(k, i);
        for (int j = k; j <= n; ++j) GR(j, k) = w.span_right(k, j);
      }
      const std::pair<int, const MatrixXd*> sides[] = {{kSpanLeft, &GL}, {kSpanRight, &GR}};
      for (const auto& [head, G] : sides) {
        const std::string name = p + kHeadNames[head] + ".U";
        const MatrixXd& U = params_[name];
        grad[name] += reps.a[head] * (*G) * reps.a[kSpanHead].transpose();
        da[head] += U * reps.a[kSpanHead] * G->transpose();
        da[kSpanHead] += U.transpose() * reps.a[head] * (*G);
      }
    }

    if (!arcs.empty()) {  // labels
      const MatrixXd logp = score_labels(reps, arcs);
      const MatrixXd& U = params_[p + "label.U"];
      MatrixXd& dU = grad[p + "label.U"];
      const int d = config_.label_dim + 1;
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        const double total = label_weights.row(k).sum();
        const auto [h, m] = arcs[k];
        const VectorXd vh = reps.a[kLabelHead].col(h), vm = reps.a[kLabelMod].col(m);
        for (Eigen::Index l = 0; l < logp.cols(); ++l) {
          const double dz = label_weights(k, l) - std::exp(logp(k, l)) * total;
          if (dz == 0) continue;
          const auto Ul = U.block(l * d, 0, d, d);
          dU.block(l * d, 0, d, d) += dz * vh * vm.transpose();
          da[kLabelHead].col(h) += dz * Ul * vm;
          da[kLabelMod].col(m) += dz * Ul.transpose() * vh;
        }
      }
    }

    const int Hd = config_.hidden_dim;
    MatrixXd dH = MatrixXd::Zero(2 * Hd, n + 1), dC = MatrixXd::Zero(2 * Hd, n + 1);
    for (int k = 0; k < kHeadCount; ++k) {
      const MatrixXd dz =
          (da[k].topRows(reps.r[k].rows()).array() * (1.0 - reps.r[k].array().square())).matrix();
      const MatrixXd& in = reads_boundaries(k) ? reps.C : reps.H;
      grad[p + kHeadNames[k] + ".W"] += dz * in.transpose();
      grad[p + kHeadNames[k] + ".b"] += dz.rowwise().sum();
      (reads_boundaries(k) ? dC : dH) += params_[p + kHeadNames[k] + ".W"].transpose() * dz;
    }

    const int T = n + 2;
    MatrixXd dF = MatrixXd::Zero(Hd, T), dB = MatrixXd::Zero(Hd, T);
    for (int i = 0; i <= n; ++i) {
      dF.col(i) += dH.col(i).head(Hd) + dC.col(i).head(Hd);
      dB.col(i) += dH.col(i).tail(Hd);
      dB.col(i + 1) += dC.col(i).tail(Hd);
    }
    MatrixXd dX = MatrixXd::Zero(config_.emb_dim, T);
    if (config_.encoder == EncoderKind::window)
      window_backward(reps, dF, dB, dX, grad);
    else
      bilstm_backward(reps, dF, dB, dX, grad);

    MatrixXd& demb = grad["emb"];
    MatrixXd& dflag = grad["expr_flag"];
    for (int q = 0; q < T; ++q) {
      demb.col(reps.ids[q]) += dX.col(q);
      if (reps.in_expr[q]) dflag.col(0) += dX.col(q);
    }
  }

 private:
  int head_dim(int head) const {
    switch (head) {
      case kArcHead:
      case kArcMod: return config_.arc_dim;
      case kSibSib:
      case kSibHead:
      case kSibMod: return config_.sib_dim;
      case kSpanHead:
      case kSpanLeft:
      case kSpanRight: return config_.span_dim;
      default: return config_.label_dim;
    }
  }

  static const NeuralReps& cast(const Representations& base) {
    const auto* reps = dynamic_cast<const NeuralReps*>(&base);
    expects(reps != nullptr, "representations come from a different scorer");
    return *reps;
  }

  MatrixXd label_logits(const NeuralReps& reps, const ArcList& arcs) const {
    const auto& labels = stage_labels(reps.stage);
    const int L = static_cast<int>(labels.size());
    const int d = config_.label_dim + 1;
    const MatrixXd& U = params_[stage_prefix(reps.stage) + "label.U"];
    MatrixXd z(arcs.size(), L);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto [h, m] = arcs[k];
      expects(h >= 0 && h <= reps.n && m >= 1 && m <= reps.n && h != m, "arc out of bounds");
      for (int l = 0; l < L; ++l)
        z(k, l) = reps.a[kLabelHead].col(h).dot(U.block(l * d, 0, d, d) * reps.a[kLabelMod].col(m));
    }
    return z;
  }

  // ---- window encoder ----
  void window_forward(NeuralReps& reps) const {
    const int D = config_.emb_dim, T = static_cast<int>(reps.x.cols());
    MatrixXd left = MatrixXd::Zero(2 * D, T), right = MatrixXd::Zero(2 * D, T);
    for (int q = 0; q < T; ++q) {
      if (q > 0) left.col(q).head(D) = reps.x.col(q - 1);
      left.col(q).tail(D) = reps.x.col(q);
      right.col(q).head(D) = reps.x.col(q);
      if (q + 1 < T) right.col(q).tail(D) = reps.x.col(q + 1);
    }
    reps.F = ((params_["enc.fwd.W"] * left).colwise() + params_["enc.fwd.b"].col(0))
                 .array().tanh().matrix();
    reps.B = ((params_["enc.bwd.W"] * right).colwise() + params_["enc.bwd.b"].col(0))
                 .array().tanh().matrix();
    reps.f_pre_in = std::move(left);
    reps.b_pre_in = std::move(right);
  }

  void window_backward(const NeuralReps& reps, const MatrixXd& dF, const MatrixXd& dB,
                       MatrixXd& dX, ParameterSet& grad) const {
    const int D = config_.emb_dim, T = static_cast<int>(reps.x.cols());
    const MatrixXd zf = (dF.array() * (1.0 - reps.F.array().square())).matrix();
    const MatrixXd zb = (dB.array() * (1.0 - reps.B.array().square())).matrix();
    grad["enc.fwd.W"] += zf * reps.f_pre_in.transpose();
    grad["enc.fwd.b"] += zf.rowwise().sum();
    grad["enc.bwd.W"] += zb * reps.b_pre_in.transpose();
    grad["enc.bwd.b"] += zb.rowwise().sum();
    const MatrixXd dl = params_["enc.fwd.W"].transpose() * zf;
    const MatrixXd dr = params_["enc.bwd.W"].transpose() * zb;
    for (int q = 0; q < T; ++q) {
      if (q > 0) dX.col(q - 1) += dl.col(q).head(D);
      dX.col(q) += dl.col(q).tail(D) + dr.col(q).head(D);
      if (q + 1 < T) dX.col(q + 1) += dr.col(q).tail(D);
    }
  }

  // ---- bidirectional LSTM ----
  void lstm_forward(const MatrixXd& in, bool reverse, const std::string& name,
                    LstmTrace& tr) const {
    const int Hd = config_.hidden_dim, T = static_cast<int>(in.cols());
    const MatrixXd& W = params_[name + ".W"];
    const VectorXd b = params_[name + ".b"].col(0);
    tr.in = in;
    tr.reverse = reverse;
    for (MatrixXd* m : {&tr.i, &tr.f, &tr.o, &tr.g, &tr.c, &tr.h}) m->setZero(Hd, T);
    VectorXd h_prev = VectorXd::Zero(Hd), c_prev = VectorXd::Zero(Hd);
    VectorXd joined(in.rows() + Hd);
    for (int s = 0; s < T; ++s) {
      const int q = reverse ? T - 1 - s : s;
      joined << in.col(q), h_prev;
      const VectorXd z = W * joined + b;
      for (int u = 0; u < Hd; ++u) {
        tr.i(u, q) = sigmoid(z(u));
        tr.f(u, q) = sigmoid(z(Hd + u));
        tr.o(u, q) = sigmoid(z(2 * Hd + u));
        tr.g(u, q) = std::tanh(z(3 * Hd + u));
        tr.c(u, q) = tr.f(u, q) * c_prev(u) + tr.i(u, q) * tr.g(u, q);
        tr.h(u, q) = tr.o(u, q) * std::tanh(tr.c(u, q));
      }
      h_prev = tr.h.col(q);
      c_prev = tr.c.col(q);
    }
  }

  // Returns the gradient with respect to the input columns.
  MatrixXd lstm_backward(const LstmTrace& tr, const MatrixXd& dh_out, const std::string& name,
                         ParameterSet& grad) const {
    const int Hd = config_.hidden_dim, T = static_cast<int>(tr.in.cols());
    const int In = static_cast<int>(tr.in.rows());
    const MatrixXd& W = params_[name + ".W"];
    MatrixXd& dW = grad[name + ".W"];
    MatrixXd& db = grad[name + ".b"];
    MatrixXd din = MatrixXd::Zero(In, T);
    VectorXd dh_next = VectorXd::Zero(Hd), dc_next = VectorXd::Zero(Hd);
    VectorXd dz(4 * Hd), joined(In + Hd);
    for (int s = T - 1; s >= 0; --s) {
      const int q = tr.reverse ? T - 1 - s : s;
      const int prev = tr.reverse ? q + 1 : q - 1;
      const bool has_prev = s > 0;
      const VectorXd dh = dh_out.col(q) + dh_next;
      for (int u = 0; u < Hd; ++u) {
        const double tc = std::tanh(tr.c(u, q));
        const double dc = dc_next(u) + dh(u) * tr.o(u, q) * (1 - tc * tc);
        const double c_prev = has_prev ? tr.c(u, prev) : 0.0;
        const double i = tr.i(u, q), f = tr.f(u, q), o = tr.o(u, q), g = tr.g(u, q);
        dz(u) = dc * g * i * (1 - i);
        dz(Hd + u) = dc * c_prev * f * (1 - f);
        dz(2 * Hd + u) = dh(u) * tc * o * (1 - o);
        dz(3 * Hd + u) = dc * i * (1 - g * g);
        dc_next(u) = dc * f;
      }
      if (has_prev)
        joined << tr.in.col(q), tr.h.col(prev);
      else
        joined << tr.in.col(q), VectorXd::Zero(Hd);
      dW += dz * joined.transpose();
      db.col(0) += dz;
      const VectorXd dj = W.transpose() * dz;
      din.col(q) += dj.head(In);
      dh_next = dj.tail(Hd);
    }
    return din;
  }

  void bilstm_forward(NeuralReps& reps) const {
    lstm_forward(reps.x, false, "enc.l1.fwd", reps.lstm[0]);
    lstm_forward(reps.x, true, "enc.l1.bwd", reps.lstm[1]);
    MatrixXd mid(2 * config_.hidden_dim, reps.x.cols());
    mid << reps.lstm[0].h, reps.lstm[1].h;
    lstm_forward(mid, false, "enc.l2.fwd", reps.lstm[2]);
    lstm_forward(mid, true, "enc.l2.bwd", reps.lstm[3]);
    reps.F = reps.lstm[2].h;
    reps.B = reps.lstm[3].h;
  }

  void bilstm_backward(const NeuralReps& reps, const MatrixXd& dF, const MatrixXd& dB,
                       MatrixXd& dX, ParameterSet& grad) const {
    const int Hd = config_.hidden_dim;
    const MatrixXd dmid = lstm_backward(reps.lstm[2], dF, "enc.l2.fwd", grad) +
                          lstm_backward(reps.lstm[3], dB, "enc.l2.bwd", grad);
    dX += lstm_backward(reps.lstm[0], dmid.topRows(Hd), "enc.l1.fwd", grad);
    dX += lstm_backward(reps.lstm[1], dmid.bottomRows(Hd), "enc.l1.bwd", grad);
  }
};

}  // namespace

std::unique_ptr<Scorer> make_neural_scorer(const Config& config, const Vocabulary& vocab) {
  return std::make_unique<NeuralScorer>(config, vocab);
}

}  // namespace ssa
