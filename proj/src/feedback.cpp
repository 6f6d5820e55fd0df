#include "polyhjb/feedback.hpp"

namespace polyhjb {

GainSet make_gain_set(const ReducedSystem& red, const RiccatiSolution& ric, int degree,
                      std::optional<Order3Gain> K3) {
    if (degree != 2 && degree != 3)
        throw InvalidArgumentError("make_gain_set: degree must be 2 or 3");
    if (degree == 3 && !K3)
        throw InvalidArgumentError("make_gain_set: degree 3 requires a cubic gain");
    GainSet g;
    g.alpha = ric.alpha;
    g.Pi = ric.Pi;
    g.L2 = -(red.Bt.transpose() * ric.Pi * red.Et) / ric.alpha;
    g.Bt = red.Bt;
    g.K3 = std::move(K3);
    g.degree = degree;
    return g;
}

Vector eval_u(const GainSet& g, const Vector& y) {
    if (y.size() != g.L2.cols()) throw DimensionError("eval_u state", g.L2.cols(), y.size());
    Vector u = g.L2 * y;
    if (g.degree >= 3) {
        if (!g.K3) throw InvalidArgumentError("eval_u: degree-3 gain set without K3");
        u -= g.K3->contract_states(y, y) / (2.0 * g.alpha);
    }
    return u;
}

Vector eval_Gk(const GainSet& g, int k, const Vector& y) {
    if (k != 3) throw InvalidArgumentError("eval_Gk: only k = 3 is available");
    if (!g.K3) throw InvalidArgumentError("eval_Gk: gain set carries no cubic gain");
    return g.Bt * (-(g.K3->contract_states(y, y)) / (2.0 * g.alpha));
}

}  // namespace polyhjb
