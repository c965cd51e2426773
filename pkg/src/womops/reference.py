"""Embedded reference values for the benchmark tables.

Each row records the published reference optimum for one parameter
point: (tau, c2, K, r) -> (t1, t2, t3, F, lambda_p, profit, decision).
Reference values are printed at two decimals, so comparisons use the
tolerances in ``ROW_TOLERANCES``.

Benchmark setups:

* T3: delivery-time signal, linear fee family (a=100, b=1), K=2000, r=8.
* T4: delivery-time signal, logarithmic fee family (a=20, b=101), K=1000,
  r=8.
* T5: service-frequency signal, linear fee family, tau=1, K/r varied.
* T6: service-frequency signal, logarithmic fee family, tau=1, K/r varied.
* T7/T8: eleven-round feedback traces at tau=2, F=10 under the
  delivery-time signal with c2=1 and c2=3 respectively.

Shared across all setups: h=4, lambda_r=50, delta=5, M=30, fee bounds
[10, 100].
"""

from __future__ import annotations

#: Comparison tolerances for reproduced table rows.
ROW_TOLERANCES = {"t": 0.02, "F": 0.5, "lambda_p": 0.5, "profit": 1.0}

#: Tolerances for reproduced trace iterations.
TRACE_TOLERANCES = {"lambda_p": 0.02, "t3": 0.01, "t1": 0.01}

# (tau, c2, K, r): (t1, t2, t3, F, lambda_p, profit, decision)
T3_ROWS = {
    (1.0, 1.0, 2000.0, 8.0): (0.45, 0.00, 1.00, 10.00, 450.00, 1331.73, "Opt-Eq"),
    (1.5, 1.0, 2000.0, 8.0): (0.00, 0.00, 1.50, 10.00, 450.00, 1346.67, "Non-opt-Eq"),
    (2.0, 1.0, 2000.0, 8.0): (0.00, 0.00, 2.00, 10.00, 450.00, 1230.00, "Non-opt-Eq"),
    (5.0, 1.0, 2000.0, 8.0): (0.00, 0.00, 2.75, 10.00, 247.58, 307.98, "Non-opt-Eq"),
    (6.0, 1.0, 2000.0, 8.0): (0.00, 0.00, 2.84, 10.00, 213.15, 204.14, "Non-opt-Eq"),
    (1.0, 3.0, 2000.0, 8.0): (0.45, 0.00, 1.00, 10.00, 450.00, 1331.73, "Opt-Eq"),
    (1.5, 3.0, 2000.0, 8.0): (0.00, 0.00, 1.50, 10.00, 450.00, 1346.67, "Cycles"),
    (2.0, 3.0, 2000.0, 8.0): (0.00, 0.00, 2.00, 10.00, 450.00, 1230.00, "Cycles"),
    (5.0, 3.0, 2000.0, 8.0): (1.71, 0.00, 5.00, 100.00, 0.00, 58.36, "Opt-Eq"),
    (6.0, 3.0, 2000.0, 8.0): (1.48, 0.00, 6.00, 100.00, 0.00, 103.34, "Opt-Eq"),
}

T4_ROWS = {
    (1.0, 1.0, 1000.0, 8.0): (0.05, 0.00, 1.00, 10.00, 451.09, 2138.87, "Opt-Eq"),
    (1.5, 1.0, 1000.0, 8.0): (0.00, 0.00, 1.50, 10.00, 451.09, 2018.84, "Non-opt-Eq"),
    (2.0, 1.0, 1000.0, 8.0): (0.00, 0.00, 2.00, 10.00, 451.09, 1734.42, "Non-opt-Eq"),
    (5.0, 1.0, 1000.0, 8.0): (0.00, 0.00, 2.47, 10.00, 222.89, 691.88, "Non-opt-Eq"),
    (6.0, 1.0, 1000.0, 8.0): (0.00, 0.00, 2.53, 10.00, 190.54, 576.64, "Non-opt-Eq"),
    (1.0, 3.0, 1000.0, 8.0): (0.05, 0.00, 1.00, 10.00, 451.09, 2138.87, "Opt-Eq"),
    (1.5, 3.0, 1000.0, 8.0): (0.00, 0.00, 1.50, 10.00, 451.09, 2018.84, "Cycles"),
    (2.0, 3.0, 1000.0, 8.0): (0.00, 0.00, 2.00, 10.00, 451.09, 1734.42, "Cycles"),
    # Reference marks this row as the cyclic-run-beats-stationary case.
    (5.0, 3.0, 1000.0, 8.0): (0.00, 0.00, 3.40, 45.21, 126.77, 295.74, "Cycles"),
    (6.0, 3.0, 1000.0, 8.0): (0.78, 0.00, 6.00, 100.00, 0.00, 243.53, "Opt-Eq"),
}

T5_ROWS = {
    (1.0, 0.1, 3000.0, 16.0): (0.35, 0.23, 1.00, 10.00, 438.76, 4441.47, "Non-opt-Eq"),
    (1.0, 0.2, 3000.0, 16.0): (0.00, 0.57, 1.00, 10.00, 450.00, 4415.80, "Non-opt-Eq"),
    (1.0, 1.0, 3000.0, 16.0): (0.00, 0.56, 1.00, 10.00, 450.00, 4415.75, "Non-opt-Eq"),
    (1.0, 0.1, 3000.0, 48.0): (0.01, 0.00, 1.00, 10.00, 449.69, 20130.16, "Non-opt-Eq"),
    (1.0, 0.2, 3000.0, 48.0): (0.00, 0.00, 1.00, 10.00, 450.00, 20130.00, "Non-opt-Eq"),
    (1.0, 1.0, 3000.0, 48.0): (0.00, 0.00, 1.00, 10.00, 450.00, 20130.06, "Non-opt-Eq"),
    (1.0, 0.1, 4000.0, 16.0): (0.45, 0.45, 1.00, 10.00, 437.94, 3867.46, "Non-opt-Eq"),
    (1.0, 0.2, 4000.0, 16.0): (0.00, 0.89, 1.00, 10.00, 450.00, 3835.91, "Non-opt-Eq"),
    (1.0, 1.0, 4000.0, 16.0): (0.00, 0.89, 1.00, 10.00, 450.00, 3835.89, "Non-opt-Eq"),
    (1.0, 0.1, 4000.0, 48.0): (0.20, 0.15, 1.00, 10.00, 442.87, 19257.85, "Non-opt-Eq"),
    (1.0, 0.2, 4000.0, 48.0): (0.00, 0.33, 1.00, 10.00, 450.00, 19230.10, "Non-opt-Eq"),
    (1.0, 1.0, 4000.0, 48.0): (0.00, 0.33, 1.00, 10.00, 450.00, 19230.08, "Non-opt-Eq"),
}

T6_ROWS = {
    (1.0, 0.1, 3000.0, 16.0): (0.34, 0.23, 1.00, 10.00, 440.16, 4455.13, "Non-opt-Eq"),
    (1.0, 0.2, 3000.0, 16.0): (0.00, 0.56, 1.00, 10.00, 451.09, 4429.85, "Non-opt-Eq"),
    (1.0, 1.0, 3000.0, 16.0): (0.00, 0.56, 1.00, 10.00, 451.09, 4429.84, "Non-opt-Eq"),
    (1.0, 0.1, 3000.0, 48.0): (0.01, 0.00, 1.00, 10.00, 450.52, 20180.12, "Non-opt-Eq"),
    (1.0, 0.2, 3000.0, 48.0): (0.00, 0.00, 1.00, 10.00, 451.09, 20180.14, "Non-opt-Eq"),
    (1.0, 1.0, 3000.0, 48.0): (0.00, 0.00, 1.00, 10.00, 451.09, 20180.19, "Non-opt-Eq"),
    (1.0, 0.1, 4000.0, 16.0): (0.46, 0.45, 1.00, 10.00, 438.84, 3880.43, "Non-opt-Eq"),
    (1.0, 0.2, 4000.0, 16.0): (0.00, 0.88, 1.00, 10.00, 451.09, 3849.26, "Non-opt-Eq"),
    (1.0, 1.0, 4000.0, 16.0): (0.00, 0.88, 1.00, 10.00, 451.09, 3849.24, "Non-opt-Eq"),
    (1.0, 0.1, 4000.0, 48.0): (0.19, 0.15, 1.00, 10.00, 444.14, 19306.37, "Non-opt-Eq"),
    (1.0, 0.2, 4000.0, 48.0): (0.00, 0.33, 1.00, 10.00, 451.09, 19279.51, "Non-opt-Eq"),
    (1.0, 1.0, 4000.0, 48.0): (0.00, 0.33, 1.00, 10.00, 451.09, 19279.46, "Non-opt-Eq"),
}

#: Eleven-iteration reference trace, c2 = 1 (converging).
T7_TRACE = {
    "lambda_p": (450.00, 335.41, 388.50, 360.98, 374.49, 367.67, 371.07,
                 369.37, 370.22, 369.79, 370.00),
    "t1": (0.00,) * 11,
    "t2": (0.00,) * 11,
    "t3": (1.49, 1.73, 1.60, 1.66, 1.63, 1.65, 1.64, 1.65, 1.64, 1.64, 1.64),
}

#: Eleven-iteration reference trace, c2 = 3 (two-point cycle).
T8_TRACE = {
    "lambda_p": (450.00, 186.34) * 5 + (450.00,),
    "t1": (0.00, 0.25) * 5 + (0.00,),
    "t2": (0.00,) * 11,
    "t3": (1.49, 2.00) * 5 + (1.49,),
}

TABLE_ROWS = {"T3": T3_ROWS, "T4": T4_ROWS, "T5": T5_ROWS, "T6": T6_ROWS}
TRACES = {"T7": T7_TRACE, "T8": T8_TRACE}
