"""Compiled numerical kernels: model right-hand sides and the DOPRI5 stepper.

Everything here works on bare float64 arrays so it can be jitted.  The
parameter vector layout is fixed by ``PARAM_ORDER`` and the state layout by
``STATE_ORDER`` in :mod:`ferrostat.model`; keep the two modules in sync.

If numba is unavailable the module still imports and runs interpreted (the
``njit`` decorator degrades to a no-op), just much slower.
"""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# Parameter vector indices.
I_K_FE_INPUT = 0
I_K_FE_EXPORT = 1
I_K_FE_CONS = 2
I_N_FT = 3
I_K_IRP_PROD = 4
I_K_FE_IRP = 5
I_THETA_FE_IRP = 6
I_K_IRP_DEG = 7
I_K_FT_PROD = 8
I_K_IRP_FT = 9
I_THETA_IRP_FT = 10
I_K_FT_DEG = 11
I_K_FPN1A_PROD = 12
I_K_IRP_FPN1A = 13
I_THETA_IRP_FPN1A = 14
I_K_FPN1A_DEG = 15
I_K_TFR1_PROD = 16
I_K_IRP_TFR1 = 17
I_K_TFR1_DEG = 18
I_N_HILL = 19

N_PARAMS = 20

# State vector indices (row/column order of the Jacobian).
I_FE = 0
I_TFR1 = 1
I_FPN1A = 2
I_FT = 3
I_IRP = 4

N_STATES = 5


@njit(cache=True)
def sig_plus_k(x, theta, n):
    # Ratio form: r^n/(1+r^n) for r <= 1, 1/(1+r^-n) for r > 1, so the
    # power never overflows even at n = 30 and x/theta ~ 1e6.  Tiny negative
    # x (integrator excursions within tolerance) is clamped to 0.
    if x <= 0.0:
        return 0.0
    r = x / theta
    if r > 1.0:
        return 1.0 / (1.0 + r ** (-n))
    rn = r ** n
    return rn / (1.0 + rn)


@njit(cache=True)
def rhs_k(y, p, tf_sat, out):
    """Full sigmoidal right-hand side; writes the 5 derivatives into ``out``.

    The ferritin derivative is computed first and substituted into the iron
    balance, which contains the term -n_Ft * dFt/dt.
    """
    fe = y[I_FE]
    tfr1 = y[I_TFR1]
    fpn1a = y[I_FPN1A]
    ft = y[I_FT]
    irp = y[I_IRP]
    n = p[I_N_HILL]

    sig_irp_ft = sig_plus_k(irp, p[I_THETA_IRP_FT], n)
    sig_irp_fpn1a = sig_plus_k(irp, p[I_THETA_IRP_FPN1A], n)
    sig_fe_irp = sig_plus_k(fe, p[I_THETA_FE_IRP], n)

    d_ft = p[I_K_FT_PROD] - p[I_K_IRP_FT] * sig_irp_ft - p[I_K_FT_DEG] * ft
    d_fe = (
        p[I_K_FE_INPUT] * tfr1 * tf_sat
        - p[I_N_FT] * d_ft
        - p[I_K_FE_EXPORT] * fe * fpn1a
        - p[I_K_FE_CONS] * fe
    )
    d_irp = p[I_K_IRP_PROD] - p[I_K_FE_IRP] * sig_fe_irp * irp - p[I_K_IRP_DEG] * irp
    d_fpn1a = (
        p[I_K_FPN1A_PROD] - p[I_K_IRP_FPN1A] * sig_irp_fpn1a - p[I_K_FPN1A_DEG] * fpn1a
    )
    d_tfr1 = p[I_K_TFR1_PROD] + p[I_K_IRP_TFR1] * irp - p[I_K_TFR1_DEG] * tfr1

    out[I_FE] = d_fe
    out[I_TFR1] = d_tfr1
    out[I_FPN1A] = d_fpn1a
    out[I_FT] = d_ft
    out[I_IRP] = d_irp


@njit(cache=True)
def rhs_replete_k(y, p, tf_sat, out):
    """Iron-replete step-function approximation of the right-hand side.

    The iron sigmoid is frozen at 1 and both IRP sigmoids at 0, which is the
    regime in which the closed-form stationary point and the triangular
    Jacobian are derived.
    """
    fe = y[I_FE]
    tfr1 = y[I_TFR1]
    fpn1a = y[I_FPN1A]
    ft = y[I_FT]
    irp = y[I_IRP]

    d_ft = p[I_K_FT_PROD] - p[I_K_FT_DEG] * ft
    d_fe = (
        p[I_K_FE_INPUT] * tfr1 * tf_sat
        - p[I_N_FT] * d_ft
        - p[I_K_FE_EXPORT] * fe * fpn1a
        - p[I_K_FE_CONS] * fe
    )
    d_irp = p[I_K_IRP_PROD] - (p[I_K_FE_IRP] + p[I_K_IRP_DEG]) * irp
    d_fpn1a = p[I_K_FPN1A_PROD] - p[I_K_FPN1A_DEG] * fpn1a
    d_tfr1 = p[I_K_TFR1_PROD] + p[I_K_IRP_TFR1] * irp - p[I_K_TFR1_DEG] * tfr1

    out[I_FE] = d_fe
    out[I_TFR1] = d_tfr1
    out[I_FPN1A] = d_fpn1a
    out[I_FT] = d_ft
    out[I_IRP] = d_irp


# Dormand-Prince 5(4) tableau.  The 5th-order solution is propagated; the
# embedded 4th-order difference drives step control; the Hairer quartic
# interpolant provides dense output.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0

_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075.0 / 11282082432.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
)

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_STEP_BUDGET = 2
STATUS_NEGATIVE_STATE = 3


@njit(cache=True)
def _error_norm(err, y0, y1, rtol, atol):
    acc = 0.0
    for i in range(N_STATES):
        scale = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        e = err[i] / scale
        acc += e * e
    return np.sqrt(acc / N_STATES)


@njit(cache=True)
def dopri5_segment(p, tf_sat, t0, t1, y0, rtol, atol, max_steps):
    """Integrate the iron model over [t0, t1] at constant input ``tf_sat``.

    Returns ``(status, ts, ys, rcont)`` where ``ts`` has one entry per
    accepted step boundary (including both segment ends), ``ys`` the states
    at those times, and ``rcont[i]`` the five interpolant coefficient vectors
    for the step from ``ts[i]`` to ``ts[i+1]``.
    """
    span = t1 - t0
    cap = 512
    ts = np.empty(cap + 1)
    ys = np.empty((cap + 1, N_STATES))
    rcont = np.empty((cap, 5, N_STATES))

    t = t0
    y = y0.copy()
    ts[0] = t
    ys[0, :] = y

    k1 = np.empty(N_STATES)
    k2 = np.empty(N_STATES)
    k3 = np.empty(N_STATES)
    k4 = np.empty(N_STATES)
    k5 = np.empty(N_STATES)
    k6 = np.empty(N_STATES)
    k7 = np.empty(N_STATES)
    ytmp = np.empty(N_STATES)
    ynew = np.empty(N_STATES)
    err = np.empty(N_STATES)

    rhs_k(y, p, tf_sat, k1)

    # Hairer-style initial step guess from the solution and derivative scales.
    d0 = 0.0
    d1 = 0.0
    for i in range(N_STATES):
        scale = atol + rtol * abs(y[i])
        d0 += (y[i] / scale) ** 2
        d1 += (k1[i] / scale) ** 2
    d0 = np.sqrt(d0 / N_STATES)
    d1 = np.sqrt(d1 / N_STATES)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * span if span > 1e-6 else span
    else:
        h = 0.01 * d0 / d1
    if h > span:
        h = span

    n_acc = 0
    n_att = 0
    while t < t1:
        if n_att >= max_steps:
            return STATUS_STEP_BUDGET, ts[: n_acc + 1], ys[: n_acc + 1], rcont[:n_acc]
        if h < 1e-14 * max(abs(t), 1.0):
            return (
                STATUS_STEP_UNDERFLOW,
                ts[: n_acc + 1],
                ys[: n_acc + 1],
                rcont[:n_acc],
            )
        if t + h > t1:
            h = t1 - t
        n_att += 1

        for i in range(N_STATES):
            ytmp[i] = y[i] + h * _A21 * k1[i]
        rhs_k(ytmp, p, tf_sat, k2)
        for i in range(N_STATES):
            ytmp[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        rhs_k(ytmp, p, tf_sat, k3)
        for i in range(N_STATES):
            ytmp[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        rhs_k(ytmp, p, tf_sat, k4)
        for i in range(N_STATES):
            ytmp[i] = y[i] + h * (
                _A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]
            )
        rhs_k(ytmp, p, tf_sat, k5)
        for i in range(N_STATES):
            ytmp[i] = y[i] + h * (
                _A61 * k1[i]
                + _A62 * k2[i]
                + _A63 * k3[i]
                + _A64 * k4[i]
                + _A65 * k5[i]
            )
        rhs_k(ytmp, p, tf_sat, k6)
        for i in range(N_STATES):
            ynew[i] = y[i] + h * (
                _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
            )
        rhs_k(ynew, p, tf_sat, k7)
        for i in range(N_STATES):
            err[i] = h * (
                _E1 * k1[i]
                + _E3 * k3[i]
                + _E4 * k4[i]
                + _E5 * k5[i]
                + _E6 * k6[i]
                + _E7 * k7[i]
            )
        enorm = _error_norm(err, y, ynew, rtol, atol)

        if enorm <= 1.0:
            # The model is nonnegative; excursions below zero within the
            # step's own error allowance are projected back to the admissible
            # set, anything worse aborts (the dynamics genuinely left it).
            clamped = False
            for i in range(N_STATES):
                if ynew[i] < 0.0:
                    if ynew[i] >= -16.0 * (atol + rtol * abs(y[i])):
                        ynew[i] = 0.0
                        clamped = True
                    else:
                        return (
                            STATUS_NEGATIVE_STATE,
                            ts[: n_acc + 1],
                            ys[: n_acc + 1],
                            rcont[:n_acc],
                        )
            if clamped:
                rhs_k(ynew, p, tf_sat, k7)
            if n_acc == cap:
                new_cap = cap * 2
                ts2 = np.empty(new_cap + 1)
                ys2 = np.empty((new_cap + 1, N_STATES))
                rc2 = np.empty((new_cap, 5, N_STATES))
                ts2[: n_acc + 1] = ts[: n_acc + 1]
                ys2[: n_acc + 1] = ys[: n_acc + 1]
                rc2[:n_acc] = rcont[:n_acc]
                ts, ys, rcont, cap = ts2, ys2, rc2, new_cap
            for i in range(N_STATES):
                ydiff = ynew[i] - y[i]
                bspl = h * k1[i] - ydiff
                rcont[n_acc, 0, i] = y[i]
                rcont[n_acc, 1, i] = ydiff
                rcont[n_acc, 2, i] = bspl
                rcont[n_acc, 3, i] = ydiff - h * k7[i] - bspl
                rcont[n_acc, 4, i] = h * (
                    _D1 * k1[i]
                    + _D3 * k3[i]
                    + _D4 * k4[i]
                    + _D5 * k5[i]
                    + _D6 * k6[i]
                    + _D7 * k7[i]
                )
            n_acc += 1
            t = t + h
            ts[n_acc] = t
            ys[n_acc, :] = ynew
            for i in range(N_STATES):
                y[i] = ynew[i]
                k1[i] = k7[i]  # FSAL
            if enorm == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, max(0.2, 0.9 * enorm ** -0.2))
            h = h * factor
        else:
            h = h * max(0.2, 0.9 * enorm ** -0.2)

    return STATUS_OK, ts[: n_acc + 1], ys[: n_acc + 1], rcont[:n_acc]


@njit(cache=True)
def dense_eval(ts, rcont, query, out):
    """Evaluate the interpolant at sorted query times within [ts[0], ts[-1]]."""
    n_steps = len(ts) - 1
    j = 0
    for q in range(len(query)):
        tq = query[q]
        while j < n_steps - 1 and tq >= ts[j + 1]:
            j += 1
        h = ts[j + 1] - ts[j]
        if h == 0.0:
            theta = 0.0
        else:
            theta = (tq - ts[j]) / h
        for i in range(N_STATES):
            c0 = rcont[j, 0, i]
            c1 = rcont[j, 1, i]
            c2 = rcont[j, 2, i]
            c3 = rcont[j, 3, i]
            c4 = rcont[j, 4, i]
            out[q, i] = c0 + theta * (c1 + (1.0 - theta) * (c2 + theta * (c3 + (1.0 - theta) * c4)))
