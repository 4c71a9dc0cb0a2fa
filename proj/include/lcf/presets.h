#pragma once

#include "lcf/scm.h"

namespace lcf::presets {

// d = 10 linear-additive model with fixed coefficient vectors, U ~ U(0,1),
// A ∈ {0, 1}.
LinearAdditiveScm appendix_b();

// Same vectors in the multiplicative family, A ∈ {1, 2}.
MultiplicativeBinaryScm multiplicative_f();

// Y = (0.5987·U + e^A)^(2/3), U ~ U(0,1), A ∈ {0, 1}, M = e^(-2/3)/9.
ScalarMonotoneScm scalar_e();

// Known-parameter law-school model used for the semi-synthetic pipeline.
LawSchoolScm law_semisynthetic();

// α = w = [1], β = [1], γ = 1, A ∈ {0, 1}.
LinearAdditiveScm linear_toy();
// α = w = [1], β = [0], γ = 1, A ∈ {1, 2}.
MultiplicativeBinaryScm multiplicative_toy();

}  // namespace lcf::presets
