"""Published reference values, typed in from the source tables."""
from fractions import Fraction as F

# Classical weights (alpha_1.., a_1..) per scheme.
CLASSICAL = {
    "C4": ((F(1, 4),), (F(3, 4),)),
    "C6": ((F(1, 3),), (F(7, 9), F(1, 36))),
    "C8": ((F(4, 9), F(1, 36)), (F(20, 27), F(25, 216))),
    "C10": ((F(1, 2), F(1, 20)), (F(17, 24), F(101, 600), F(1, 600))),
    "C12": ((F(9, 16), F(9, 100), F(1, 400)), (F(21, 32), F(231, 1000), F(49, 4000))),
    "C14": ((F(3, 5), F(3, 25), F(1, 175)), (F(31, 50), F(67, 250), F(283, 12250), F(1, 9800))),
    "C16": (
        (F(16, 25), F(4, 25), F(16, 1225), F(1, 4900)),
        (F(72, 125), F(38, 125), F(1784, 42875), F(761, 686000)),
    ),
}

# Prefactored implicit weights beta_k.
BETA = {
    "PC4": (0.211324870586,),
    "PC6": (0.276393202250,),
    "PC8": (0.353614989057, 0.022913166676),
    "PC10": (0.390891054882, 0.041982762456),
    "PC12": (0.424261339307, 0.076528671307, 0.002177424900),
    "PC14": (0.440844836186, 0.103628733678, 0.005175974177),
    "PC16": (0.450833811211, 0.139274137394, 0.012291382216, 0.000195518547),
}

# Prefactored explicit weights b_k.
B = {
    "PC4": (1.000000000000,),
    "PC6": (0.907868932583, 0.046065533708),
    "PC8": (0.679849926548, 0.160075036725),
    "PC10": (0.544199349631, 0.223702048938, 0.002798850830),
    "PC12": (0.377436479527, 0.283739040458, 0.018361813185),
    "PC14": (0.270368050633, 0.312589794656, 0.034570978390, 0.000184856220),
    "PC16": (0.157403729700, 0.326389389050, 0.060796869771, 0.001856720721),
}

# The printed PC4 beta_1 differs from its closed form (1 - 1/sqrt(3))/2 in the
# ninth decimal; every other entry is printed to twelve correct decimals.
PC4_BETA1_CLOSED_FORM = 0.21132486540518711775

# Spectral-like scheme: published classical weights and prefactored result.
SPECTRAL_LIKE_ALPHA = (0.5771439, 0.0896406)
SPECTRAL_LIKE_A = (1.3025166 / 2, 0.99355 / 4, 0.03750245 / 6)
SPECTRAL_LIKE_BETA = (0.4482545282296, 0.0817278256497)
SPECTRAL_LIKE_B = (0.3069790178973, 0.3294144889364, 0.0113973418854)

# Linear case errors (grid labels 40, 60, 80, 100) and printed orders.
LINEAR_L2 = {
    "PC4": (1.2147772e-02, 2.5019901e-03, 7.4323530e-04, 2.9341239e-04),
    "PC6": (4.4073207e-03, 3.8415139e-04, 6.1152769e-05, 1.5190237e-05),
    "PC8": (1.6601837e-03, 5.3936887e-05, 4.2014630e-06, 6.3432171e-07),
}
LINEAR_P = {"PC4": 3.9058, "PC6": 5.8700, "PC8": 8.3155, "PC10": 10.1140}
BURGERS_P = {"PC4": 4.2243, "PC6": 6.3415, "PC8": 8.4347, "PC10": 9.8317}

# Paired L2 errors, prefactored vs classical, linear case.
PAIRED_L2 = {
    4: (4.4090580981e-03, 4.4101995527e-03),
    6: (6.0846046295e-04, 6.0895634631e-04),
    8: (7.2394864471e-05, 7.2375087716e-05),
    10: (1.5989324725e-05, 1.5470197664e-05),
}

# Percentage decrease of computing time, prefactored vs classical.
TIME_DECREASE = {4: 41.7, 6: 40.2, 8: 33.1, 10: 32.3}
