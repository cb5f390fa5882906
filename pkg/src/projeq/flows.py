"""One-parameter families of quadratic first integrals of the geodesic flow.

Given a metric g and a compatible endomorphism L, each parameter value t
yields the quadratic form

    I_t(x, p) = p . (S_t v),   v = g^{-1} p,   S_t = adj(L - t Id)

polynomial of degree n-1 in t. The adjugate coefficients come from the
Faddeev-LeVerrier recursion, which also gives exact x-derivatives, so
Poisson brackets here carry no finite-difference noise.

Root structure: for fixed (x, p) the polynomial t -> I_t has n-1 real
roots interlacing the eigenvalues of L at x; `roots` and the audits
below test exactly that.
"""

from __future__ import annotations

import numpy as np

from .errors import ComplexRoots, ZeroVelocity
from .fields import PhaseState
from .pairs import pencil_spectrum, spectrum_at


def _fl_adjugate(a):
    """Coefficient matrices of adj(t I - A) = sum_k M_{k+1} t^{n-1-k}.

    Faddeev-LeVerrier: M_1 = I, c_{n-k} = -tr(A M_k)/k,
    M_{k+1} = A M_k + c_{n-k} I. Returns the list [M_1 .. M_n].
    """
    n = a.shape[0]
    eye = np.eye(n)
    m = eye.copy()
    mats = [m]
    for k in range(1, n):
        am = a @ m
        c = -np.trace(am) / k
        m = am + c * eye
        mats.append(m)
    return mats


def _fl_adjugate_with_grad(a, da):
    """The recursion above with derivative propagation.

    da[i, j, d] = d A_ij / d x_d. Returns (mats, dmats) with
    dmats[k][i, j, d] the matching partials of M_{k+1}.
    """
    n = a.shape[0]
    eye = np.eye(n)
    m = eye.copy()
    dm = np.zeros((n, n, n))
    mats = [m]
    dmats = [dm]
    for k in range(1, n):
        am = a @ m
        dam = np.einsum("isd,sj->ijd", da, m) + np.einsum("is,sjd->ijd", a, dm)
        c = -np.trace(am) / k
        dc = -np.einsum("iid->d", dam) / k
        m = am + c * eye
        dm = dam + np.einsum("d,ij->ijd", dc, eye)
        mats.append(m)
        dmats.append(dm)
    return mats, dmats


class IntegralFamily:
    """The family I_t attached to one (g, L) pair on a chart."""

    def __init__(self, g, L, check_points=16, eps_sym_factor=1e-9):
        if g.chart != L.chart:
            raise ValueError("g and L must share a chart")
        self.g = g
        self.L = L
        self.chart = g.chart
        if check_points:
            for x in self.chart.sample(check_points, seed=11):
                L.require_self_adjoint(g, x, eps_sym_factor)

    # -- coefficient data -------------------------------------------------

    def coeff_matrices(self, x):
        """C_j with adj(L - t Id) = sum_j t^j C_j; C_{n-1} = (-1)^{n-1} Id."""
        n = self.g.dim
        sign = 1.0 if (n - 1) % 2 == 0 else -1.0
        mats = _fl_adjugate(self.L.matrix(x))
        # adj(t I - L) = sum_k M_{k+1} t^{n-1-k}; flip sign for adj(L - t I)
        return [sign * mats[n - 1 - j] for j in range(n)]

    def coeff_matrices_with_grad(self, x):
        n = self.g.dim
        sign = 1.0 if (n - 1) % 2 == 0 else -1.0
        mats, dmats = _fl_adjugate_with_grad(self.L.matrix(x), self.L.dmatrix(x))
        cs = [sign * mats[n - 1 - j] for j in range(n)]
        dcs = [sign * dmats[n - 1 - j] for j in range(n)]
        return cs, dcs

    def s_matrix(self, x, t):
        cs = self.coeff_matrices(x)
        out = np.zeros_like(cs[0])
        for j, c in enumerate(cs):
            out += (t ** j) * c
        return out

    # -- evaluation ---------------------------------------------------------

    def value(self, state: PhaseState, t: float) -> float:
        v = np.linalg.solve(self.g.matrix(state.x), state.p)
        return float(state.p @ (self.s_matrix(state.x, t) @ v))

    def t_coefficients(self, state: PhaseState):
        """a_j with I_t = sum_j a_j t^j; leading a_{n-1} = +-2H != 0."""
        v = np.linalg.solve(self.g.matrix(state.x), state.p)
        cs = self.coeff_matrices(state.x)
        return np.array([float(state.p @ (c @ v)) for c in cs])

    def roots(self, state: PhaseState, imag_clamp=1e-9):
        """The n-1 real roots of t -> I_t, ascending.

        The leading coefficient is (-1)^{n-1} 2H, so a nonzero momentum
        always gives exactly n-1 roots. Imaginary parts below
        imag_clamp * (1 + |root|) are clamped (double roots emerge from
        the companion eigensolver with tiny imaginary noise); larger
        ones raise ComplexRoots since real-rootedness is a theorem for
        compatible (g, L).
        """
        coeffs = self.t_coefficients(state)
        lead = abs(coeffs[-1])
        if lead < 1e-14 * max(1.0, float(np.abs(coeffs).max())):
            raise ZeroVelocity("momentum too small: leading coefficient vanishes")
        rts = np.roots(coeffs[::-1])
        bad = np.abs(rts.imag) > imag_clamp * (1.0 + np.abs(rts))
        if bad.any():
            raise ComplexRoots(
                f"root imaginary part {np.abs(rts.imag).max():.3e} exceeds clamp"
            )
        return np.sort(rts.real)

    # -- exact gradients ------------------------------------------------------

    def gradients(self, state: PhaseState, t: float):
        """(dI/dx, dI/dp) at the phase point, both length n."""
        x, p = state.x, state.p
        gmat = self.g.matrix(x)
        dg = self.g.dmatrix(x)
        ginv = np.linalg.inv(gmat)
        cs, dcs = self.coeff_matrices_with_grad(x)
        n = self.g.dim
        s = np.zeros((n, n))
        ds = np.zeros((n, n, n))
        for j in range(n):
            s += (t ** j) * cs[j]
            ds += (t ** j) * dcs[j]
        dginv = -np.einsum("ia,abk,bj->ijk", ginv, dg, ginv)
        q = s @ ginv
        dq = np.einsum("ijk,jl->ilk", ds, ginv) + np.einsum("ij,jlk->ilk", s, dginv)
        grad_x = np.einsum("i,ijk,j->k", p, dq, p)
        grad_p = (q + q.T) @ p
        return grad_x, grad_p

    def energy_gradients(self, state: PhaseState):
        """Gradients of H = 1/2 p^T g^{-1} p."""
        x, p = state.x, state.p
        gmat = self.g.matrix(x)
        dg = self.g.dmatrix(x)
        v = np.linalg.solve(gmat, p)
        grad_x = -0.5 * np.einsum("i,ijk,j->k", v, dg, v)
        return grad_x, v

    def poisson(self, state: PhaseState, t1: float, t2: float) -> float:
        """{I_t1, I_t2} at the phase point; zero up to rounding."""
        ax, ap = self.gradients(state, t1)
        bx, bp = self.gradients(state, t2)
        return float(ax @ bp - ap @ bx)

    def poisson_with_energy(self, state: PhaseState, t: float) -> float:
        ax, ap = self.gradients(state, t)
        hx, hp = self.energy_gradients(state)
        return float(ax @ hp - ap @ hx)

    def commutation_report(self, phase_points, t_values, tol=1e-8) -> dict:
        """Pairwise brackets over the t-grid, scaled by 1 + |I_a| + |I_b|."""
        worst = 0.0
        worst_detail = None
        pairs = [
            (t_values[i], t_values[j])
            for i in range(len(t_values))
            for j in range(i + 1, len(t_values))
        ]
        for state in phase_points:
            for ta, tb in pairs:
                br = self.poisson(state, ta, tb)
                scale = 1.0 + abs(self.value(state, ta)) + abs(self.value(state, tb))
                rel = abs(br) / scale
                if rel > worst:
                    worst = rel
                    worst_detail = {
                        "t_pair": [ta, tb],
                        "x": [float(v) for v in state.x],
                        "bracket": br,
                    }
            for ta in t_values:
                br = self.poisson_with_energy(state, ta)
                scale = 1.0 + abs(self.value(state, ta))
                rel = abs(br) / scale
                if rel > worst:
                    worst = rel
                    worst_detail = {
                        "t_pair": [ta, "energy"],
                        "x": [float(v) for v in state.x],
                        "bracket": br,
                    }
        return {
            "max_scaled_bracket": worst,
            "tol": tol,
            "pass": bool(worst <= tol),
            "states": len(phase_points),
            "t_grid": list(t_values),
            "worst": worst_detail,
        }


# -- spectra and orderings ----------------------------------------------------


class SpectrumProfile:
    """Pointwise eigenvalue data of L with respect to g."""

    def __init__(self, g, L, tau_deg_factor=1e-7):
        self.g = g
        self.L = L
        self.tau_deg_factor = tau_deg_factor

    def eigenvalues(self, x):
        return spectrum_at(self.g, self.L, x)

    def gap_floor(self, x, lam=None):
        if lam is None:
            lam = self.eigenvalues(x)
        return self.tau_deg_factor * (1.0 + float(np.abs(lam).max()))

    def clusters(self, x):
        """Distinct eigenvalues with multiplicities, gap set by tau_deg."""
        lam = self.eigenvalues(x)
        tau = self.gap_floor(x, lam)
        out = []
        for v in lam:
            if out and v - out[-1][0] < tau:
                val, cnt = out[-1]
                out[-1] = ((val * cnt + v) / (cnt + 1), cnt + 1)
            else:
                out.append((float(v), 1))
        return out


def ordering_audit(g, L, points, tau_ord=1e-8) -> dict:
    """Global eigenvalue-band separation over a point sample.

    Band i passes when max_x lambda_i(x) <= min_y lambda_{i+1}(y) + tau_ord
    with x, y ranging over the whole sample independently. This is the
    strong form needed for the roots of different phase points to be
    comparable; pointwise ordering is weaker and not what is audited.
    """
    lams = np.array([pencil_spectrum(g.matrix(x), L.matrix(x)) for x in points])
    n = lams.shape[1]
    bands = []
    worst = -np.inf
    for i in range(n - 1):
        hi = float(lams[:, i].max())
        lo = float(lams[:, i + 1].min())
        viol = hi - lo
        bands.append({
            "band": i,
            "upper_max": hi,
            "next_min": lo,
            "violation": viol,
            "argmax": [float(v) for v in points[int(np.argmax(lams[:, i]))]],
            "argmin": [float(v) for v in points[int(np.argmin(lams[:, i + 1]))]],
        })
        worst = max(worst, viol)
    return {
        "bands": bands,
        "max_violation": worst,
        "tau_ord": tau_ord,
        "pass": bool(worst <= tau_ord),
        "points": int(len(points)),
    }


def interlacing_audit(family: IntegralFamily, phase_points, slack=1e-9) -> dict:
    """Roots of I_t vs eigenvalues of L at each phase point.

    Checks lambda_i - slack <= t_i <= lambda_{i+1} + slack for every
    root index i at each point.
    """
    worst = -np.inf
    worst_detail = None
    for state in phase_points:
        rts = family.roots(state)
        lam = spectrum_at(family.g, family.L, state.x)
        for i, t in enumerate(rts):
            viol = max(lam[i] - t, t - lam[i + 1])
            if viol > worst:
                worst = viol
                worst_detail = {
                    "x": [float(v) for v in state.x],
                    "root_index": i,
                    "root": float(t),
                    "bracket": [float(lam[i]), float(lam[i + 1])],
                }
    return {
        "max_violation": worst,
        "slack": slack,
        "pass": bool(worst <= slack),
        "states": len(phase_points),
        "worst": worst_detail,
    }
