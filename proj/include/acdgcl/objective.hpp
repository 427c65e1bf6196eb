#pragma once

#include <optional>

#include "acdgcl/model.hpp"

namespace acdgcl {

/// Which reconstruction residuals of the cross-view mechanism are active
/// (ablations drop one side).
enum class ReconMode { Both, IntraOnly, CrossOnly };

struct ReconInputs {
    Var z1, z2;            // encoder outputs per view
    Var z1_aug, z1_inv;
    Var z2_aug, z2_inv;
};

struct LossBreakdown {
    Var total_var;
    double l_inv = 0.0;
    double l_recon = 0.0;
    double l_adv = 0.0;
    double total = 0.0;
    double lambda_r = 0.0;
    double lambda_a = 0.0;
    double temperature = 0.0;
};

/// Symmetrized InfoNCE over cosine similarities with negatives drawn from the
/// opposite view; log-sum-exp is stabilized by max subtraction.
Var info_nce(Tape& tape, Var za, Var zb, double temperature);

/// View-invariance loss: InfoNCE between the two views' invariant representations.
Var invariance_loss(Tape& tape, Var z1_inv, Var z2_inv, double temperature);

/// Intra- and cross-view reconstruction residuals, averaged over both views:
/// (1/2B) sum_i sum_w [ ||z_w - z_w^r||^2 + ||z_w - z_w^cr||^2 ].
Var reconstruction_loss(Tape& tape, const ReconInputs& inputs, const ModelConfig& config,
                        const std::map<std::string, Var>& params, ReconMode mode = ReconMode::Both);

/// Adversarial contrastive loss: the adversarial view's invariant representation
/// paired against both augmentation views.
Var adversarial_loss(Tape& tape, Var z1_inv, Var z2_inv, Var z_adv_inv, double temperature);

/// total = l_inv + lambda_r * l_recon + lambda_a * l_adv, composed exactly in
/// that order; components retained for logging.
LossBreakdown joint_objective(Tape& tape, Var l_inv, Var l_recon, std::optional<Var> l_adv,
                              double lambda_r, double lambda_a, double temperature);

}  // namespace acdgcl
