// Values produced by closed_forms.py (40-digit mpmath, explicit index
// contraction). Regenerate with: python3 tests/oracle/closed_forms.py
#pragma once

namespace decohere::oracle {

constexpr double WWBAR_C = 1.7917594692280550008;
constexpr double WWBAR_CG = 1.0640015541471331385;
constexpr double WWBAR_CL = 0.72775791508092186232;
constexpr double WWBAR_T = 1.3516836265989140659;
constexpr double WWBAR_K = 0.28768207245178092744;
constexpr double WWBAR_M1 = 2.0794415416798359283;
constexpr double WWBAR_M2 = 2.0794415416798359283;
constexpr double STAR_C = 1.3862943611198906188;
constexpr double STAR_CG = 0.96380309734051186059;
constexpr double STAR_CL = 0.42249126377937875824;
constexpr double STAR_T = 1.3953262060181832518;
constexpr double STAR_K = 0.43152310867767139116;
constexpr double STAR_M1 = 1.81781746979756201;
constexpr double STAR_M2 = 1.81781746979756201;
constexpr double DEPHASE_P_2_21E5_100 = 0.099141659854902357828;
constexpr double S_5_6 = 0.45056120886630468865;

// Single-qubit marginals of the star state: A and B have eigenvalues
// 1/2 -+ sqrt(2)/4, C has {1/4, 3/4}.
constexpr double STAR_MARGINAL_AB_LOW = 0.1464466094067262378;
constexpr double STAR_MARGINAL_AB_HIGH = 0.8535533905932737622;

}  // namespace decohere::oracle
