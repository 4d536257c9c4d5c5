"""Volume products, the Santalo point, the two inequality chains, bound
verification and simplex-image detection."""
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import curves
from . import hull as _hull
from .body import Polytope, _sphere_tris, adjugate_times, smooth_approx
from .constants import REGULAR_SIMPLEX_PRODUCT, TOL, report_tolerance
from .equipartition import residual_of, solve_d2, solve_s4
from .errors import GeometryError, InvarianceError, MahlerError, PreconditionError, SolverError
from .fixtures import d2_vertices, s4_vertices
from .groups import TETRAHEDRON, group, is_invariant, orbit_union
from .quadrature import integrate_sphere_triangles

CHAIN_RESIDUAL = 1e-6
CHAIN_SMOOTHING_P = 12
D2_CHAIN_GROUPS = ("D2", "T", "Td")
S4_CHAIN_GROUPS = ("S4", "D2d")
BOUND_GROUPS = ("D2", "S4", "D2d", "T", "Td")
SWEEP_SMOOTH_RTOL = 1e-8  # ample for the 1e-6 smooth budget


# ------------------------------------------------------------------ products

@dataclass
class SantaloResult:
    z: np.ndarray
    polar_volume: float
    iterations: int
    displacement: float

    def as_dict(self):
        return {"z": [float(t) for t in self.z], "polar_volume": self.polar_volume,
                "iterations": self.iterations, "displacement": self.displacement}


def _polar_moments(K, z):
    """Volume, first and second moments of (K - z)° (about o).

    Smooth bodies parametrize the boundary of (K - z)° by
    y(u) = g(u) / (1 - g(u) . z), g = grad mu_K, over the sphere of
    directions u; the cone element is phi^3 J du with phi = 1 / (1 - g . z)
    and J = g . adj(Hess mu) u, the same Jacobian as the polar volume.
    """
    z = np.asarray(z, dtype=float)
    if K.is_polytope:
        P = K.translated(-z)
        if not P.origin_interior:
            raise GeometryError("point is not interior")
        return _hull.moments(P.polar().hull)

    def f(U):
        _, g, H = K.derivatives(U)
        s = 1.0 - g @ z
        if np.any(s <= 0):
            raise GeometryError("point is not interior")
        phi = 1.0 / s
        J = np.einsum("ij,ij->i", g, adjugate_times(H, U))
        out = np.empty((len(U), 13))
        out[:, 0] = phi ** 3 * J / 3.0
        out[:, 1:4] = (phi ** 4 * J / 4.0)[:, None] * g
        out[:, 4:] = ((phi ** 5 * J / 5.0)[:, None, None] * g[:, :, None] * g[:, None, :]
                      ).reshape(-1, 9)
        return out

    m = integrate_sphere_triangles(f, _sphere_tris(), rtol=K.quad_rtol)
    return float(m[0]), m[1:4], m[4:].reshape(3, 3)


def santalo_point(K, tol=1e-12, max_iter=100):
    """Minimizer of z -> |K^z| by damped Newton.

    |K^z| is strictly convex on int K with gradient 4 int_{(K-z)°} y dy and
    Hessian 20 int_{(K-z)°} y y^T dy, so both come from the polar's moments.
    """
    z = K.centroid() if K.is_polytope else np.zeros(3)
    V, m1, m2 = _polar_moments(K, z)
    for it in range(1, max_iter + 1):
        g = 4.0 * m1
        H = 20.0 * m2
        step = -np.linalg.solve(H, g)
        t = 1.0
        while True:
            try:
                Vn, m1n, m2n = _polar_moments(K, z + t * step)
                if Vn <= V:
                    break
            except GeometryError:
                pass
            t /= 2
            if t < 1e-12:
                raise SolverError("Santalo iteration stalled", {"z": z.tolist(), "volume": V})
        z = z + t * step
        rel = (V - Vn) / V
        V, m1, m2 = Vn, m1n, m2n
        if np.linalg.norm(t * step) <= tol * max(1.0, np.linalg.norm(z)) or rel < tol * 1e-3:
            return SantaloResult(z, V, it, float(np.linalg.norm(m1) / V))
    raise SolverError("Santalo iteration did not converge", {"z": z.tolist(), "volume": V})


def volume_product(K, mode="at-origin"):
    if mode == "at-origin":
        return K.volume() * K.polar_volume()
    if mode == "santalo":
        return K.volume() * santalo_point(K).polar_volume
    raise ValueError(f"unknown mode {mode!r}")


# ------------------------------------------------------------------ chains

@dataclass
class ChainStep:
    name: str
    lhs: float
    rhs: float
    kind: str  # "inequality" (lhs >= rhs) or "identity"
    tolerance: float

    @property
    def slack(self):
        return self.lhs - self.rhs

    @property
    def passed(self):
        if self.kind == "identity":
            return abs(self.slack) <= self.tolerance
        return self.slack >= -self.tolerance

    def as_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "kind": self.kind, "tolerance": self.tolerance, "passed": self.passed}


@dataclass
class ChainReport:
    kind: str
    parameters: dict
    steps: list
    values: dict
    product: float
    chain_bound: float
    final_bound: float
    quantities: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(s.passed for s in self.steps)

    def as_dict(self):
        return {"kind": self.kind, "parameters": self.parameters,
                "steps": [s.as_dict() for s in self.steps], "values": self.values,
                "product": self.product, "chain_bound": self.chain_bound,
                "final_bound": self.final_bound, "passed": self.passed,
                "quantities": {k: [float(t) for t in np.atleast_1d(v)]
                               for k, v in self.quantities.items()}}


def _require_smooth(K):
    if K.is_polytope:
        raise PreconditionError("chains need a smooth body; run them on a smoothing")


def _cone_pair(K, gens):
    """|K n pos(gens)| and the volume of o * Lambda of the matching boundary patch."""
    return curves.cone_region_volume(K, gens), curves.polar_patch_volume(K, gens)


def chain_d2(K, part, tol=TOL.smooth_oracle):
    _require_smooth(K)
    if part.residual > CHAIN_RESIDUAL:
        raise PreconditionError(f"equipartition residual {part.residual:.3g} too large")
    p = np.asarray(part.p, dtype=float)
    p = p / K.gauge(-p)  # v--- onto the boundary
    a, b, c = p
    vmmm, vmpp, vpmp, vppm = d2_vertices(p)
    arcs = [(vpmp, vppm), (vppm, vmpp), (vmpp, vpmp)]
    Cb = [curves.radial_cbar(K, x, y) for x, y in arcs]
    Lb = [curves.lambda_cbar(K, x, y) for x, y in arcs]
    K0, LK0 = _cone_pair(K, [vmpp, vpmp, vppm])
    P = K.volume() * K.polar_volume()
    ctot, ltot = sum(Cb), sum(Lb)
    dot_tot = float(ctot @ ltot)
    pairs = [float(x @ y) for x, y in zip(Cb, Lb)]
    pol = -K.gradient(vmmm)
    ao, bo, co = pol
    lam = {tuple(v): K.gradient(v) for v in (vmpp, vpmp, vppm)}
    pair_rhs = [0.25 * float((x - y) @ (lam[tuple(x)] - lam[tuple(y)])) for x, y in arcs]
    closed = [b * bo + c * co, a * ao + c * co, a * ao + b * bo]
    norm = a * ao + b * bo + c * co
    rel = tol * max(1.0, P)
    steps = [
        ChainStep("volume_split", 16 * K0 * LK0, P, "identity", rel),
        ChainStep("surface_estimate", 9 * K0 * LK0, dot_tot, "inequality", tol),
        ChainStep("cross_terms", dot_tot, 2 * sum(pairs), "identity", tol),
    ]
    for i in range(3):
        steps.append(ChainStep(f"curve_pairing_{i + 1}", pairs[i], pair_rhs[i], "inequality", tol))
        steps.append(ChainStep(f"pairing_closed_form_{i + 1}", pair_rhs[i], closed[i],
                               "identity", tol))
    steps.append(ChainStep("normalization", norm, 1.0, "identity", tol))
    values = {"product": P, "split": 16 * K0 * LK0, "surface": 16 / 9 * dot_tot,
              "paired": 32 / 9 * sum(pairs), "curve": 32 / 9 * sum(pair_rhs),
              "final": 64 / 9 * norm}
    return ChainReport("D2", {"p": [float(t) for t in p], "residual": part.residual},
                       steps, values, P, values["surface"], values["curve"],
                       {"cbar": np.concatenate(Cb), "lambda_cbar": np.concatenate(Lb),
                        "polar_abc": pol, "K0": K0, "LK0": LK0})


def chain_s4(K, bal, tol=TOL.smooth_oracle, identity_tol=1e-9):
    _require_smooth(K)
    if bal.residual > CHAIN_RESIDUAL:
        raise PreconditionError(f"balance residual {bal.residual:.3g} too large")
    u = bal.u
    v = s4_vertices(u)
    v = v / K.gauge(v[0])  # v0 onto the boundary
    v0, v1, v2 = v[0], v[1], v[2]
    C01, C12, C20 = (curves.radial_cbar(K, x, y) for x, y in ((v0, v1), (v1, v2), (v2, v0)))
    L01, L12, L20 = (curves.lambda_cbar(K, x, y) for x, y in ((v0, v1), (v1, v2), (v2, v0)))
    a, b, c = C01
    alpha, beta, gamma = C20
    ao, bo, co = L01
    alo, beo, gao = L20
    K0, LK0 = _cone_pair(K, [v0, v1, v2])
    P = K.volume() * K.polar_volume()
    star = float((C01 + C12 + C20) @ (L01 + L12 + L20))
    star_form = (2 * u * c + beta) * (-ao + bo + beo) + 4 * c * co
    balanced = 4 * float(C01 @ L01) + 2 * float(C20 @ L20)
    G0, G1, G2 = K.gradient(v0), K.gradient(v1), K.gradient(v2)
    r01 = float((v0 - v1) @ (G0 - G1))
    r20 = 0.5 * float((v2 - v0) @ (G2 - G0))
    rel = tol * max(1.0, P)
    steps = [
        ChainStep("volume_split", 16 * K0 * LK0, P, "identity", rel),
        ChainStep("surface_estimate", 9 * K0 * LK0, star, "inequality", tol),
        ChainStep("star_form", star, star_form, "identity", tol),
        ChainStep("balance", beta, 2 * u * c, "identity", tol),
        ChainStep("balanced_star", star, balanced, "identity", tol),
        ChainStep("curve_pairing_01", 4 * float(C01 @ L01), r01, "inequality", tol),
        ChainStep("curve_pairing_20", 2 * float(C20 @ L20), r20, "inequality", tol),
        ChainStep("normalization", r01 + r20, 4.0, "identity", tol),
        ChainStep("a = -uc", a, -u * c, "identity", identity_tol),
        ChainStep("b = uc", b, u * c, "identity", identity_tol),
        ChainStep("alpha = 0", alpha, 0.0, "identity", identity_tol),
        ChainStep("gamma = 0", gamma, 0.0, "identity", identity_tol),
        ChainStep("gamma_polar = 0", gao, 0.0, "identity", identity_tol),
    ]
    values = {"product": P, "split": 16 * K0 * LK0, "surface": 16 / 9 * star,
              "balanced": 16 / 9 * balanced, "curve": 16 / 9 * (r01 + r20)}
    q = {"a": a, "b": b, "c": c, "alpha": alpha, "beta": beta, "gamma": gamma,
         "a_polar": ao, "b_polar": bo, "c_polar": co, "alpha_polar": alo, "beta_polar": beo,
         "gamma_polar": gao, "K0": K0, "LK0": LK0}
    return ChainReport("S4", {"u": u, "residual": bal.residual}, steps, values, P,
                       values["surface"], values["curve"], q)


# ------------------------------------------------------------------ equality

def _maps_to(A, B):
    """Least-squares M with M A_i = B_i, and the max residual."""
    X, *_ = np.linalg.lstsq(A, B, rcond=None)
    M = X.T
    return M, float(np.max(np.abs(A @ M.T - B)))


def _simplex_witness(V, G, tol):
    scale = max(1.0, float(np.abs(V).max()))
    fallback = None
    for perm in itertools.permutations(range(4)):
        M, res = _maps_to(TETRAHEDRON, V[list(perm)])
        if res > tol * scale or abs(np.linalg.det(M)) < 1e-12:
            continue
        if G is None or all(np.max(np.abs(M @ g - g @ M)) <= tol * scale for g in G.matrices):
            return M, True
        if fallback is None:
            fallback = M
    return fallback, False


def is_simplex_image(K, G=None, tol=1e-8):
    """Linear map M with K = M(regular simplex), else None.

    The polar of the regular simplex T is -T/3, so this also detects images
    of T°.  Returns a dict {"kind", "witness", "commutes"}; the witness
    commutes with G when such a choice exists.
    """
    if not K.is_polytope or len(K.vertices) != 4:
        return None
    M, commutes = _simplex_witness(np.asarray(K.vertices, dtype=float), G, tol)
    if M is None:
        return None
    image = TETRAHEDRON @ M.T
    if _hull.hausdorff_vertices(image, K.vertices) > tol * max(1.0, np.abs(image).max()):
        return None
    return {"kind": "simplex", "witness": M, "commutes": commutes}


# ------------------------------------------------------------------ verify

@dataclass
class VerifyReport:
    group: str
    volume: float
    polar_volume: float
    product: float
    gap: float
    tolerance: float
    chain: dict = None
    equality: dict = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        if self.group not in BOUND_GROUPS:
            return True
        return self.gap >= -self.tolerance

    def as_dict(self):
        eq = None
        if self.equality is not None:
            eq = {"kind": self.equality["kind"], "commutes": self.equality["commutes"],
                  "witness": [[float(t) for t in row] for row in self.equality["witness"]]}
        return {"group": self.group, "volume": self.volume, "polar_volume": self.polar_volume,
                "product": self.product, "gap": self.gap, "tolerance": self.tolerance,
                "passed": self.passed, "chain": self.chain, "equality": eq,
                "notes": list(self.notes)}


def _run_chain(K, G):
    if G.name in D2_CHAIN_GROUPS:
        part = solve_d2(K, tol=1e-10)
        return chain_d2(K, part).as_dict()
    if G.name in S4_CHAIN_GROUPS:
        bal = solve_s4(K, tol=1e-10)
        return chain_s4(K, bal).as_dict()
    return None


def verify(K, G, chain=True, tol=None):
    """Volume product at o, the gap to 64/9, the matching chain and an equality diagnosis."""
    tol = report_tolerance() if tol is None else tol
    if isinstance(G, str):
        G = group(G)
    if not is_invariant(G, K):
        raise InvarianceError(f"body is not {G.name}-invariant")
    vol = K.volume()
    pvol = K.polar_volume()
    P = vol * pvol
    if not K.is_polytope:
        tol = max(tol, TOL.smooth_oracle)
    report = VerifyReport(G.name, vol, pvol, P, P - REGULAR_SIMPLEX_PRODUCT, tol)
    if chain and (G.name in D2_CHAIN_GROUPS or G.name in S4_CHAIN_GROUPS):
        target = K
        if K.is_polytope:
            target = smooth_approx(K, CHAIN_SMOOTHING_P, G)
            report.notes.append(f"chain evaluated on the p={CHAIN_SMOOTHING_P} smoothing")
        try:
            report.chain = _run_chain(target, G)
        except (SolverError, PreconditionError) as exc:
            report.notes.append(f"chain-skipped: {exc}")
    elif chain:
        report.notes.append(f"chain-skipped: no chain for group {G.name}")
    report.equality = is_simplex_image(K, G)
    return report


# ------------------------------------------------------------------ sweeps

def random_invariant_body(G, n_seeds=None, kind="polytope", seed=0, inner=0.05, p=8):
    """Convex hull of G-orbits of random points in the shell 0.5 <= |x| <= 1.

    A small octahedron keeps o interior; smooth bodies are p-smoothings of
    the polytope's (G-closed) facet family.
    """
    if isinstance(G, str):
        G = group(G)
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6)) if n_seeds is None else int(n_seeds)
    if n < 1:
        raise ValueError("n_seeds must be at least 1")
    octa = inner * np.vstack([np.eye(3), -np.eye(3)])
    for _ in range(16):
        d = rng.normal(size=(n, 3))
        d /= np.linalg.norm(d, axis=1)[:, None]
        r = np.cbrt(rng.uniform(0.125, 1.0, size=n))
        pts = orbit_union(G, d * r[:, None])
        try:
            K = Polytope.from_vertices(np.vstack([pts, octa]))
        except GeometryError:
            continue
        if not K.origin_interior:
            continue
        # symmetrize the vertex set exactly (hull rounding can break exact invariance)
        K = Polytope.from_vertices(orbit_union(G, K.vertices))
        if kind == "smooth":
            return smooth_approx(K, p, G), K
        return K, K
    raise GeometryError("could not draw a nondegenerate invariant body")


CSV_COLUMNS = ("seed", "group", "nverts", "volume", "polar_volume", "product", "gap",
               "equality_flag")


def _fmt(x):
    return repr(float(x)) if math.isfinite(x) else "nan"


def sweep_row(args):
    gname, seed, kind = args
    G = group(gname)
    try:
        K, base = random_invariant_body(G, None, kind, seed)
        if kind == "smooth":
            K.quad_rtol = SWEEP_SMOOTH_RTOL
        vol = K.volume()
        pvol = K.polar_volume()
        P = vol * pvol
        eq = is_simplex_image(K, G)
        flag = "none" if eq is None else eq["kind"]
        return {"seed": seed, "group": G.name, "nverts": len(base.vertices), "volume": vol,
                "polar_volume": pvol, "product": P, "gap": P - REGULAR_SIMPLEX_PRODUCT,
                "equality_flag": flag}
    except MahlerError as exc:
        return {"seed": seed, "group": G.name, "nverts": 0, "volume": math.nan,
                "polar_volume": math.nan, "product": math.nan, "gap": math.nan,
                "equality_flag": f"error:{type(exc).__name__}"}


def sweep(G, count, seed=0, kind="polytope", jobs=1):
    """Rows for bodies with seeds seed, seed+1, ..., in seed order whatever ``jobs`` is."""
    gname = G if isinstance(G, str) else G.name
    gname = group(gname).name
    tasks = [(gname, seed + i, kind) for i in range(count)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, tasks, chunksize=max(1, count // (4 * jobs))))
    else:
        rows = [sweep_row(t) for t in tasks]
    return rows


def sweep_summary(rows, tol):
    gaps = [(r["gap"], r["seed"]) for r in rows if math.isfinite(r["gap"])]
    failures = [r for r in rows if r["equality_flag"].startswith("error")]
    violations = [r for r in rows if math.isfinite(r["gap"]) and r["gap"] < -tol]
    min_gap, argmin = min(gaps) if gaps else (math.nan, None)
    return {"count": len(rows), "min_gap": min_gap, "argmin_seed": argmin,
            "failures": len(failures), "violations": len(violations)}


def rows_to_csv(rows):
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(",".join([str(r["seed"]), r["group"], str(r["nverts"]), _fmt(r["volume"]),
                               _fmt(r["polar_volume"]), _fmt(r["product"]), _fmt(r["gap"]),
                               r["equality_flag"]]))
    return "\n".join(lines) + "\n"
