#include "sparc/sparse_rep.hpp"

#include <cmath>
#include <map>

#include "sparc/errors.hpp"
#include "sparc/rng.hpp"

namespace sparc {

namespace {

Mat xavier(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
    return m;
}

}  // namespace

SparcParams init_sparc(int d, const std::vector<int>& orders, std::uint64_t seed) {
    if (d < 1) throw UsageError("bad sparc width");
    for (int o : orders)
        if (o < 1 || o > 3) throw UsageError("unsupported n-gram order");
    Rng rng(seed);
    SparcParams p;
    p.d = d;
    p.orders = orders;
    for (auto& role_heads : p.heads) {
        role_heads.resize(orders.size());
        for (auto& h : role_heads) {
            // Identity-anchored: self-match scores start positive. A [CLS]
            // row whose rectified scores are all zero gets no gradient and
            // can never recover, so the init must keep the heads alive.
            h.wq = Mat::Identity(d, d) + 0.5 * xavier(d, d, rng);
            h.wk = Mat::Identity(d, d) + 0.5 * xavier(d, d, rng);
        }
    }
    return p;
}

AttentionMatrix attention(const Mat& h, const SparcParams& params, Role role,
                          std::size_t order_idx, Side side) {
    if (h.cols() != params.d) throw UsageError("attention dimension mismatch");
    if (order_idx >= params.orders.size()) throw UsageError("attention order out of range");
    const auto& head = params.head(role, order_idx);
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.d));

    AttentionMatrix out;
    out.role = role;
    out.order = params.orders[order_idx];
    const Mat k = h * head.wk;
    if (side == Side::Document) {
        const Mat q = h * head.wq;
        out.values = (q * k.transpose() * scale).cwiseMax(0.0);
    } else {
        const Vec q_cls = (h.row(0) * head.wq).transpose();
        out.values = (k * q_cls * scale).transpose().cwiseMax(0.0);
    }
    return out;
}

SparseVector sparse_encode(const AttentionMatrix& a, const NgramFeatureMatrix& f,
                           std::uint32_t position) {
    if (a.order != f.order) throw UsageError("kernel order mismatch");
    if (static_cast<std::size_t>(a.values.cols()) != f.rows())
        throw UsageError("attention/feature length mismatch");
    if (position >= a.values.rows()) throw UsageError("sparse_encode position out of range");

    std::map<std::uint64_t, double> acc;  // repeated n-grams sum
    for (std::size_t j = 0; j < f.rows(); ++j) {
        if (!f.present(j)) continue;
        const double w = a.values(position, static_cast<Eigen::Index>(j));
        if (w > 0.0) acc[f.id_at(j)] += w;
    }

    SparseVector v;
    v.role = a.role;
    v.order = a.order;
    v.position = position;
    v.ids.reserve(acc.size());
    v.weights.reserve(acc.size());
    for (const auto& [id, w] : acc) {
        const auto wf = static_cast<float>(w);
        if (wf > 0.0f) {
            v.ids.push_back(id);
            v.weights.push_back(wf);
        }
    }
    return v;
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.ids.size() && j < b.ids.size()) {
        if (a.ids[i] < b.ids[j])
            ++i;
        else if (a.ids[i] > b.ids[j])
            ++j;
        else {
            sum += static_cast<double>(a.weights[i]) * static_cast<double>(b.weights[j]);
            ++i;
            ++j;
        }
    }
    return sum;
}

std::vector<double> sparse_logits(const AttentionMatrix& a_doc, const AttentionMatrix& a_q,
                                  const MatchMatrix& kernel) {
    if (a_doc.order != a_q.order || a_doc.order != kernel.order)
        throw UsageError("kernel order mismatch");
    if (a_doc.values.rows() != a_doc.values.cols() ||
        a_doc.values.rows() != static_cast<Eigen::Index>(kernel.rows) || a_q.values.rows() != 1 ||
        a_q.values.cols() != static_cast<Eigen::Index>(kernel.cols))
        throw UsageError("sparse logit shape mismatch");

    Vec u = Vec::Zero(kernel.rows);
    for (const auto& [i, j] : kernel.ones) u(i) += a_q.values(0, j);
    const Vec l = a_doc.values * u;
    return std::vector<double>(l.data(), l.data() + l.size());
}

SparcHeadForward sparc_head_forward(const Mat& h_doc, const Mat& h_q, const SparcHead& head,
                                    const MatchMatrix& kernel) {
    const int d = static_cast<int>(head.wq.cols());
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    SparcHeadForward f;
    f.doc_q = h_doc * head.wq;
    f.doc_k = h_doc * head.wk;
    f.doc_z = f.doc_q * f.doc_k.transpose() * scale;
    f.doc_a = f.doc_z.cwiseMax(0.0);
    f.q_cls = (h_q.row(0) * head.wq).transpose();
    f.question_k = h_q * head.wk;
    f.q_z = f.question_k * f.q_cls * scale;
    f.q_a = f.q_z.cwiseMax(0.0);
    f.kernel_qa = Vec::Zero(h_doc.rows());
    for (const auto& [i, j] : kernel.ones) f.kernel_qa(i) += f.q_a(j);
    const Vec l = f.doc_a * f.kernel_qa;
    f.logits.assign(l.data(), l.data() + l.size());
    return f;
}

void sparc_head_backward(const Mat& h_doc, const Mat& h_q, const SparcHead& head,
                         const MatchMatrix& kernel, const SparcHeadForward& fwd,
                         const std::vector<double>& d_logits, SparcHeadGrads& g, Mat& d_h_doc,
                         Mat& d_h_q) {
    const int d = static_cast<int>(head.wq.cols());
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    const Eigen::Map<const Vec> dl(d_logits.data(), static_cast<Eigen::Index>(d_logits.size()));

    // logits = doc_a * kernel_qa
    const Mat d_doc_a = dl * fwd.kernel_qa.transpose();
    const Vec d_kernel_qa = fwd.doc_a.transpose() * dl;
    Vec d_q_a = Vec::Zero(fwd.q_a.size());
    for (const auto& [i, j] : kernel.ones) d_q_a(j) += d_kernel_qa(i);

    // document side: A = ReLU(Q K^T / sqrt(d))
    const Mat d_doc_z = (fwd.doc_z.array() > 0.0).select(d_doc_a, 0.0);
    const Mat d_doc_q = d_doc_z * fwd.doc_k * scale;
    const Mat d_doc_k = d_doc_z.transpose() * fwd.doc_q * scale;
    g.wq += h_doc.transpose() * d_doc_q;
    g.wk += h_doc.transpose() * d_doc_k;
    d_h_doc += d_doc_q * head.wq.transpose() + d_doc_k * head.wk.transpose();

    // question side: a = ReLU(K' q_cls / sqrt(d)), q_cls from the [CLS] row
    const Vec d_q_z = (fwd.q_z.array() > 0.0).select(d_q_a, 0.0);
    const Vec d_q_cls = fwd.question_k.transpose() * d_q_z * scale;
    const Mat d_question_k = d_q_z * fwd.q_cls.transpose() * scale;
    g.wq += h_q.row(0).transpose() * d_q_cls.transpose();
    g.wk += h_q.transpose() * d_question_k;
    d_h_q.row(0) += (head.wq * d_q_cls).transpose();
    d_h_q += d_question_k * head.wk.transpose();
}

}  // namespace sparc
