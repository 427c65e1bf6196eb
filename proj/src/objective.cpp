#include "acdgcl/objective.hpp"

namespace acdgcl {

namespace {

/// Row-normalizes a (B, d) tensor onto the unit sphere.
Var normalize_rows(Tape& t, Var z) {
    const Tensor& zv = t.value(z);
    for (Index i = 0; i < zv.rows(); ++i) {
        const double norm_sq = zv.mat().row(i).squaredNorm();
        if (norm_sq < 1e-30)
            throw std::invalid_argument("info_nce: zero-norm embedding row " + std::to_string(i));
    }
    Var norm_sq = rowwise_sum(t, mul(t, z, z));          // (B, 1)
    Var inv_norm = exp(t, scale(t, log(t, norm_sq), -0.5));
    return mul(t, z, inv_norm);
}

/// Mean over anchors of -log softmax along rows of `sim`, positives on the diagonal.
Var nce_direction(Tape& t, Var sim) {
    const Tensor& sv = t.value(sim);
    const Index b = sv.rows();
    Tensor row_max = Tensor::zeros({b, 1});
    for (Index i = 0; i < b; ++i) row_max(i, 0) = sv.mat().row(i).maxCoeff();
    Var m = t.constant(row_max);  // detached; exact for the gradient
    Var lse = add(t, log(t, rowwise_sum(t, exp(t, sub(t, sim, m)))), m);
    Tensor eye = Tensor::zeros({b, b});
    for (Index i = 0; i < b; ++i) eye(i, i) = 1.0;
    Var pos = rowwise_sum(t, mul(t, sim, t.constant(eye)));
    return mean(t, sub(t, lse, pos));
}

}  // namespace

Var info_nce(Tape& t, Var za, Var zb, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("info_nce: temperature must be positive");
    const Tensor& av = t.value(za);
    const Tensor& bv = t.value(zb);
    if (!av.same_shape(bv))
        throw std::invalid_argument("info_nce: shape mismatch " + shape_str(av.shape()) + " vs " +
                                    shape_str(bv.shape()));
    if (av.rows() < 2)
        throw std::invalid_argument("info_nce: need at least 2 rows for negatives, got " +
                                    std::to_string(av.rows()));
    Var na = normalize_rows(t, za);
    Var nb = normalize_rows(t, zb);
    Var sim_ab = scale(t, matmul(t, na, nb, false, true), 1.0 / temperature);
    Var sim_ba = scale(t, matmul(t, nb, na, false, true), 1.0 / temperature);
    return scale(t, add(t, nce_direction(t, sim_ab), nce_direction(t, sim_ba)), 0.5);
}

Var invariance_loss(Tape& t, Var z1_inv, Var z2_inv, double temperature) {
    return info_nce(t, z1_inv, z2_inv, temperature);
}

Var reconstruction_loss(Tape& t, const ReconInputs& in, const ModelConfig& config,
                        const std::map<std::string, Var>& params, ReconMode mode) {
    const Index b = t.value(in.z1).rows();
    for (Var v : {in.z2, in.z1_aug, in.z1_inv, in.z2_aug, in.z2_inv})
        if (t.value(v).rows() != b)
            throw std::invalid_argument("reconstruction_loss: inconsistent batch sizes");

    std::optional<Var> acc;
    auto add_residual = [&](Var target, Var z_aug, Var z_inv) {
        Var r = reconstruct(t, z_aug, z_inv, config, params);
        Var term = l2_norm_sq(t, sub(t, target, r));
        acc = acc ? add(t, *acc, term) : term;
    };
    if (mode != ReconMode::CrossOnly) {
        add_residual(in.z1, in.z1_aug, in.z1_inv);
        add_residual(in.z2, in.z2_aug, in.z2_inv);
    }
    if (mode != ReconMode::IntraOnly) {
        add_residual(in.z1, in.z1_aug, in.z2_inv);
        add_residual(in.z2, in.z2_aug, in.z1_inv);
    }
    return scale(t, *acc, 1.0 / (2.0 * double(b)));
}

Var adversarial_loss(Tape& t, Var z1_inv, Var z2_inv, Var z_adv_inv, double temperature) {
    return add(t, info_nce(t, z1_inv, z_adv_inv, temperature),
               info_nce(t, z2_inv, z_adv_inv, temperature));
}

LossBreakdown joint_objective(Tape& t, Var l_inv, Var l_recon, std::optional<Var> l_adv,
                              double lambda_r, double lambda_a, double temperature) {
    if (lambda_r < 0.0 || lambda_a < 0.0)
        throw std::invalid_argument("joint_objective: negative loss coefficients");
    Var adv = l_adv ? *l_adv : t.constant(Tensor::scalar(0.0));
    Var total = add(t, add(t, l_inv, scale(t, l_recon, lambda_r)), scale(t, adv, lambda_a));
    LossBreakdown out;
    out.total_var = total;
    out.l_inv = t.value(l_inv).value();
    out.l_recon = t.value(l_recon).value();
    out.l_adv = t.value(adv).value();
    out.total = t.value(total).value();
    out.lambda_r = lambda_r;
    out.lambda_a = lambda_a;
    out.temperature = temperature;
    return out;
}

}  // namespace acdgcl
