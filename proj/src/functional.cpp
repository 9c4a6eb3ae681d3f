#include "dhs/functional.hpp"

#include "dhs/errors.hpp"

namespace dhs {

FunctionalContext::FunctionalContext(std::shared_ptr<const TruncatedOperator> op,
                                     std::shared_ptr<const Nonlinearity> nl,
                                     std::shared_ptr<const SpectralDecomposition> dec)
    : op_(std::move(op)), nl_(std::move(nl)), dec_(std::move(dec)) {
  if (!op_ || !nl_) throw ConfigurationError("functional context needs an operator and a nonlinearity");
  if (op_->block_dim() != nl_->block_dim()) {
    throw DimensionError("operator and nonlinearity have different block sizes N");
  }
  if (op_->coeffs().period() != nl_->period()) {
    throw DimensionError("operator and nonlinearity have different periods T");
  }
  if (dec_ && dec_->window != op_->window()) {
    throw DimensionError("spectral decomposition lives on a different window");
  }
}

FunctionalContext FunctionalContext::build(const Window& window, const PeriodicCoefficients& coeffs,
                                           Nonlinearity nl, bool with_spectrum) {
  auto op = std::make_shared<const TruncatedOperator>(assemble(window, coeffs));
  std::shared_ptr<const SpectralDecomposition> dec;
  if (with_spectrum) dec = std::make_shared<const SpectralDecomposition>(eigendecompose(*op));
  return FunctionalContext(std::move(op), std::make_shared<const Nonlinearity>(std::move(nl)), std::move(dec));
}

FunctionalContext FunctionalContext::on_window(const Window& window, bool with_spectrum) const {
  auto op = std::make_shared<const TruncatedOperator>(assemble(window, op_->coeffs()));
  std::shared_ptr<const SpectralDecomposition> dec;
  if (with_spectrum) dec = std::make_shared<const SpectralDecomposition>(eigendecompose(*op));
  return FunctionalContext(std::move(op), nl_, std::move(dec));
}

FunctionalContext FunctionalContext::with_spectrum() const {
  if (dec_) return *this;
  return FunctionalContext(op_, nl_, std::make_shared<const SpectralDecomposition>(eigendecompose(*op_)));
}

const SpectralDecomposition& FunctionalContext::spectrum() const {
  if (!dec_) throw ConfigurationError("this operation needs a spectral decomposition of A+S");
  return *dec_;
}

namespace {

void require_window(const FunctionalContext& ctx, const BlockVector& x) {
  if (x.window() != ctx.window() || x.block_dim() != ctx.block_dim()) {
    throw DimensionError("vector does not live on the functional's window");
  }
}

Eigen::Map<const Eigen::VectorXd> node(const BlockVector& x, int n) {
  const auto b = x.block(n);
  return {b.data(), static_cast<Eigen::Index>(b.size())};
}

}  // namespace

double Psi(const FunctionalContext& ctx, const BlockVector& x) {
  require_window(ctx, x);
  const Window& w = x.window();
  double s = 0.0;
  for (int n = w.first(); n <= w.last(); ++n) s += ctx.nl().value(n, node(x, n));
  return s;
}

double Phi(const FunctionalContext& ctx, const BlockVector& x) {
  require_window(ctx, x);
  return 0.5 * l2_inner(ctx.op().apply(x), x) - Psi(ctx, x);
}

BlockVector grad_Phi(const FunctionalContext& ctx, const BlockVector& x) {
  require_window(ctx, x);
  BlockVector g = ctx.op().apply(x);
  const Window& w = x.window();
  for (int n = w.first(); n <= w.last(); ++n) {
    const Eigen::VectorXd dr = ctx.nl().gradient(n, node(x, n));
    auto gn = g.block(n);
    for (std::size_t i = 0; i < gn.size(); ++i) gn[i] -= dr[static_cast<Eigen::Index>(i)];
  }
  return g;
}

PhiSplit Phi_split(const FunctionalContext& ctx, const BlockVector& x) {
  require_window(ctx, x);
  const auto& dec = ctx.spectrum();
  const auto parts = projectors(dec, x);
  const double np = e_norm(dec, parts.plus);
  const double nm = e_norm(dec, parts.minus);
  return {0.5 * np * np, 0.5 * nm * nm, Psi(ctx, x)};
}

double sum_tildeR(const FunctionalContext& ctx, const BlockVector& x) {
  require_window(ctx, x);
  const Window& w = x.window();
  double s = 0.0;
  for (int n = w.first(); n <= w.last(); ++n) s += eval_tildeR(ctx.nl(), n, node(x, n));
  return s;
}

double energy_defect(const FunctionalContext& ctx, const BlockVector& x) {
  const double lhs = Phi(ctx, x) - 0.5 * l2_inner(grad_Phi(ctx, x), x);
  return lhs - sum_tildeR(ctx, x);
}

}  // namespace dhs
