"""Synthetic-data experiments: spectra, reconstructions, link checks, SPC studies.

Each ``run_*`` function takes an :class:`ExperimentConfig`, writes its
artifacts below ``config.out`` and returns the manifest dictionary (also
written as ``manifest.json``).  Runs are deterministic for a fixed config.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .aao_bh import BhBlockVector, BhOperator, TimeGrid, discrete_spectrum_bh
from .aao_is import IsOperator, discrete_spectrum, label_branches, spectral_eigenvalues
from .bayes import (BackwardsHeatProblem, CostConfig, InverseSourceProblem, map_estimate,
                    spc_bound_trivial_prior, spc_components)
from .export import (read_json, write_csv, write_field_image, write_json, write_nodal_csv)
from .fem import (FELaplacian, Mesh, NodalField, add_noise, interpolate, random_observation_points)
from .laplacian import SpectralBasis
from .linalg import ConvergenceError, matrix_function
from .priors import (bh_sampled_prior, check_link_condition, heuristic_bh_prior, is_joint_prior,
                     smoothness_prior)
from .spectra import find_clusters, sqrt_decay_fit

__all__ = ["ExperimentConfig", "ObservationData", "InverseCrimeError", "run_spectrum",
           "run_reconstruction", "run_link_check", "run_spc", "bump"]

PROBLEMS = ("inverse_source", "backwards_heat")


@dataclass
class ExperimentConfig:
    problem: str = "inverse_source"
    backend: str = "fem"
    # reconstruction grids (nodes per direction, boundary included)
    n_fine: int = 41
    n_coarse: int = 31
    n_obs: int = 100
    delta: float = 0.01
    seed: int = 0
    alpha: float | None = None  # None: delta^2 (1e-8 when delta = 0)
    # inverse source prior
    kappa_p: float = 1e-2
    gamma_p: float = 35.0
    kappa_s: float = 1e-2
    gamma_s: float = 35.0
    # backwards heat prior
    kappa: float = 1.5
    gamma: float = 0.5
    prior: str = "default"  # inverse_source: smoothness; backwards_heat: semigroup | heuristic
    truth: str = "default"  # inverse_source: bump; backwards_heat: sample | bump
    bump_x: float = 0.5
    bump_y: float = 0.5
    bump_radius: float = 0.45
    bump_height: float = 1.0
    T: float | None = None  # None: 1 for spectra, 0.1 for reconstructions
    N: int = 4
    variable: str = "theta"
    n_posterior_samples: int = 3
    noise_levels: list = field(default_factory=list)
    cg_tol: float = 1e-8
    cg_max_iter: int = 500
    # spectra
    n_spectrum: int = 18
    count: int | None = None  # None: 500 (inverse_source) or 700 (backwards_heat)
    modes_per_dim: int = 16
    quadrature: str = "nodal"
    corner: str = "consistent"
    route: str = "modal"
    # link checks
    link_choice: str = "trivial"
    n_link_samples: int = 100
    n_probes: int = 200
    # squared posterior contraction
    spc_modes: int = 3
    spc_draws: int = 200
    spc_alphas: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    source_exponent: float = 1.0
    data_file: str | None = None  # reuse observations written by an earlier run
    out: str = "out"

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}")
        if self.backend not in ("fem", "spectral"):
            raise ValueError("backend must be 'fem' or 'spectral'")
        if self.n_fine <= self.n_coarse:
            raise ValueError("the fine grid must be finer than the coarse grid")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.variable not in ("theta", "u"):
            raise ValueError("variable must be 'theta' or 'u'")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d.get("config", d))
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def final_time(self, default: float) -> float:
        return default if self.T is None else float(self.T)

    def effective_alpha(self, delta: float | None = None) -> float:
        if self.alpha is not None:
            return float(self.alpha)
        d = self.delta if delta is None else delta
        return d ** 2 if d > 0 else 1e-8


class InverseCrimeError(RuntimeError):
    pass


@dataclass(frozen=True)
class ObservationData:
    """Noisy point data tagged with the grid that produced them."""

    points: np.ndarray
    values: np.ndarray
    clean: np.ndarray
    grid_tag: str
    delta: float
    seed: int

    def to_dict(self):
        return dict(points=self.points.tolist(), values=self.values.tolist(),
                    clean=self.clean.tolist(), grid_tag=self.grid_tag, delta=self.delta,
                    seed=self.seed)

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["points"]), np.asarray(d["values"]), np.asarray(d["clean"]),
                   d["grid_tag"], float(d["delta"]), int(d["seed"]))


def load_data(path) -> ObservationData:
    """Read observations written by :func:`run_reconstruction`."""
    d = read_json(path)
    if "grid_tag" not in d:
        raise InverseCrimeError(f"{path}: observation file carries no grid tag")
    return ObservationData.from_dict(d)


def bump(x, y, cx=0.5, cy=0.5, radius=0.45, height=1.0):
    """Smooth compactly supported bump ``h exp(1 - 1 / (1 - r^2 / R^2))``."""
    rho2 = ((np.asarray(x) - cx) ** 2 + (np.asarray(y) - cy) ** 2) / radius ** 2
    out = np.zeros(np.broadcast(rho2).shape)
    inside = rho2 < 1.0
    out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
    return out


def _bump_formula(cfg):
    return (f"{cfg.bump_height} * exp(1 - 1/(1 - r^2/{cfg.bump_radius}^2)) for r < "
            f"{cfg.bump_radius}, r = |(x, y) - ({cfg.bump_x}, {cfg.bump_y})|")


def _out(cfg) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _manifest(cfg, command, status="ok", **extra):
    # the output directory is left out so a run's manifest does not depend on where it was written
    conf = cfg.to_dict()
    del conf["out"]
    return dict(command=command, status=status, version=__version__, config=conf, **extra)


def _finish(cfg, manifest):
    write_json(_out(cfg) / "manifest.json", manifest)
    return manifest


# -- spectra -----------------------------------------------------------------

def run_spectrum(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    out = _out(cfg)
    if cfg.problem == "inverse_source":
        summary = _spectrum_is(cfg, out)
    else:
        summary = _spectrum_bh(cfg, out)
    return _finish(cfg, _manifest(cfg, "spectrum", summary=summary, files=["spectrum.csv"]))


def _spectrum_is(cfg, out):
    count = cfg.count or 500
    if cfg.backend == "fem":
        spectrum_result = discrete_spectrum(Mesh(cfg.n_spectrum), count)
        lam, gam = spectrum_result.eigenvalues, spectrum_result.pencil_eigenvalues
    else:
        basis = SpectralBasis(cfg.modes_per_dim)
        lam, gam = spectral_eigenvalues(basis)[:count], basis.eigenvalues
    branch, mu, err = label_branches(lam, gam)
    write_csv(out / "spectrum.csv", ["index", "eigenvalue", "branch", "mu_hat"],
              zip(range(lam.size), lam, branch, mu))
    clusters = find_clusters(lam)
    lower = lam[branch == "lower"]
    fit = sqrt_decay_fit(lower) if lower.size >= 3 else None
    upper = lam[branch == "upper"]
    gap = float(upper.min() - lower.max()) if lower.size and upper.size else None
    return dict(count=int(lam.size), clusters=[c._asdict() for c in clusters],
                upper_branch_center=float(np.median(upper)) if upper.size else None,
                cluster_gap=gap, max_branch_mismatch=float(err.max()),
                lower_sqrt_decay_r2=fit.r2 if fit else None)


def _spectrum_bh(cfg, out):
    T = cfg.final_time(1.0)
    count = cfg.count or 700
    if cfg.backend != "fem":
        raise ValueError("the time-discretised spectrum is defined on the finite-element mesh")
    lam = discrete_spectrum_bh(Mesh(cfg.n_spectrum), cfg.N, T, count, route=cfg.route,
                               quadrature=cfg.quadrature, corner=cfg.corner)
    targets = np.array([1.0, 1.5, T + 1.0])
    nearest = targets[np.argmin(np.abs(lam[:, None] - targets[None, :]), axis=1)]
    write_csv(out / "spectrum.csv", ["index", "eigenvalue", "nearest_accumulation_point"],
              zip(range(lam.size), lam, nearest))
    clusters = find_clusters(lam, floor=0.5)
    spread = max((max(abs(c.low - targets).min(), abs(c.high - targets).min()) for c in clusters),
                 default=None)
    return dict(count=int(lam.size), T=T, N=cfg.N, quadrature=cfg.quadrature,
                clusters=[c._asdict() for c in clusters],
                accumulation_points=targets.tolist(),
                max_member_distance=spread,
                targets_hit={str(t): any(abs(c.center - t) <= 0.1 for c in clusters)
                             for t in targets})


# -- reconstruction ----------------------------------------------------------

def _truth_theta(cfg, mesh: Mesh, lap: FELaplacian):
    kind = cfg.truth
    if kind == "default":
        kind = "bump" if cfg.problem == "inverse_source" else "sample"
    if kind == "bump":
        f = interpolate(mesh, lambda x, y: bump(x, y, cfg.bump_x, cfg.bump_y, cfg.bump_radius,
                                                cfg.bump_height))
        return f.values, dict(kind="bump", formula=_bump_formula(cfg))
    if kind == "sample":
        cp = smoothness_prior(lap, cfg.kappa, cfg.gamma, 1)
        draw = cp.sample(np.random.default_rng(cfg.seed + 1), 1)[0]
        return draw, dict(kind="prior sample", seed=cfg.seed + 1,
                          covariance=f"(kappa + gamma A)^-1, kappa={cfg.kappa}, gamma={cfg.gamma}")
    raise ValueError(f"unknown truth {cfg.truth!r}")


def generate_data(cfg: ExperimentConfig, delta: float | None = None):
    """Forward solve on the fine mesh and noisy point observations."""
    fine = Mesh(cfg.n_fine)
    coarse_h = 1.0 / (cfg.n_coarse - 1)
    lap = FELaplacian(fine)
    theta, tinfo = _truth_theta(cfg, fine, lap)
    obs = random_observation_points(fine, cfg.n_obs, seed=cfg.seed, margin=coarse_h)
    if cfg.problem == "inverse_source":
        state = lap.power(theta, -1.0)
        clean = obs.apply(state)
    else:
        T = cfg.final_time(0.1)
        state = lap.semigroup(theta, T)  # u(T) + theta
        clean = obs.apply(state)
    d = cfg.delta if delta is None else delta
    noisy = add_noise(clean, d, seed=cfg.seed + 2)
    data = ObservationData(obs.points, noisy, clean, fine.grid_tag(), d, cfg.seed)
    return data, dict(fine=fine, lap=lap, theta=theta, state=state, truth=tinfo)


def _inversion_problem(cfg, data: ObservationData, coarse: Mesh, lap: FELaplacian):
    from .fem import observation_operator
    if data.grid_tag == coarse.grid_tag():
        raise InverseCrimeError(
            f"data were generated on the inversion grid ({data.grid_tag}); refusing to invert")
    obs = observation_operator(coarse, data.points)
    p_modal = obs.matrix() @ lap.V
    if cfg.problem == "inverse_source":
        pb = InverseSourceProblem(lap, p_modal)
        prior = is_joint_prior(lap, cfg.kappa_p, cfg.gamma_p, cfg.kappa_s, cfg.gamma_s)
        c1, c3 = prior.penalty(pb.omega_u, pb.omega_theta)
    else:
        grid = TimeGrid(cfg.final_time(0.1), cfg.N)
        pb = BackwardsHeatProblem(lap, grid, p_modal)
        kind = "semigroup" if cfg.prior == "default" else cfg.prior
        if kind == "semigroup":
            prior = bh_sampled_prior(lap, grid, cfg.kappa, cfg.gamma)
            # the state block is the push-forward of the parameter block
            c1, c3 = prior.penalty(pb.omega_u, pb.omega_theta, use_state_block=False)
        elif kind == "heuristic":
            prior = heuristic_bh_prior(pb.op)
            c1, c3 = prior.penalty(pb.omega_u, pb.omega_theta)
        else:
            raise ValueError(f"unknown prior {cfg.prior!r}")
    return pb, prior, c1, c3


def _rel_l2(lap: FELaplacian, a, b) -> float:
    diff = lap.to_modal(a - b)
    ref = lap.to_modal(b)
    return float(np.linalg.norm(diff) / np.linalg.norm(ref))


def _invert(cfg, data, coarse, lap, delta):
    pb, prior, c1, c3 = _inversion_problem(cfg, data, coarse, lap)
    alpha = cfg.effective_alpha(delta)
    costcfg = CostConfig(alpha, data.values, C1=c1, C3=c3)
    post = map_estimate(costcfg, pb, cfg.variable, tol=cfg.cg_tol, max_iter=cfg.cg_max_iter,
                        delta=delta)
    if cfg.variable == "theta":
        theta_m = post.mean
        u_m = pb.state(theta_m)
    else:
        u_m = post.mean
        theta_m = pb.parameter(u_m)
    return pb, prior, post, alpha, theta_m, u_m


def _state_slices(pb, u_modal, theta_modal):
    """Native fields to report as the state: ``u`` (IS) or the heat solution at ``t_k`` (BH)."""
    lap = pb.lap
    if isinstance(pb, InverseSourceProblem):
        return {"state": lap.from_modal(u_modal)}
    vals = pb.state_values(u_modal) + theta_modal[None, :]
    return {f"state_t{k}": lap.from_modal(vals[k]) for k in range(vals.shape[0])}


def run_reconstruction(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    if cfg.backend != "fem":
        raise ValueError("reconstructions run on the finite-element backend")
    out = _out(cfg)
    coarse = Mesh(cfg.n_coarse)
    lap_c = FELaplacian(coarse)
    files, images = [], []
    data, truth = generate_data(cfg)
    if cfg.data_file:
        data = load_data(cfg.data_file)
    write_json(out / "data.json", data.to_dict())
    files.append("data.json")
    theta_true_c = NodalField(coarse, _restrict(truth["fine"], truth["theta"], coarse)).values

    manifest = _manifest(cfg, "reconstruct", truth=truth["truth"],
                         grids=dict(fine=truth["fine"].grid_tag(), coarse=coarse.grid_tag(),
                                    fine_dofs=truth["fine"].n_interior, coarse_dofs=coarse.n_interior))
    try:
        pb, prior, post, alpha, theta_m, u_m = _invert(cfg, data, coarse, lap_c, data.delta)
    except ConvergenceError as exc:
        manifest.update(status="failed", error=str(exc), cg_iterations=exc.iterations,
                        cg_residual=exc.residual, files=files)
        _finish(cfg, manifest)
        raise

    theta_native = lap_c.from_modal(theta_m)
    fields = {"theta_true": theta_true_c, "theta_map": theta_native}
    fields.update({k + "_map": v for k, v in _state_slices(pb, u_m, theta_m).items()})
    rng = np.random.default_rng(cfg.seed + 3)
    if cfg.delta > 0 and cfg.n_posterior_samples > 0:
        draws = post.sample(rng, cfg.n_posterior_samples)
        for i, s in enumerate(draws):
            th = s if cfg.variable == "theta" else pb.parameter(s)
            fields[f"theta_sample{i}"] = lap_c.from_modal(th)
    norms = {}
    for name, vals in fields.items():
        write_nodal_csv(out / f"{name}.csv", coarse, vals)
        norms[name] = write_field_image(out / f"{name}.pgm", NodalField(coarse, vals).grid())
        files += [f"{name}.csv", f"{name}.pgm"]

    errors = [("theta", cfg.delta, _rel_l2(lap_c, theta_native, theta_true_c))]
    sweep = []
    for d in cfg.noise_levels:
        dat_d, _ = generate_data(cfg, delta=float(d))
        _, _, post_d, _, th_d, _ = _invert(cfg, dat_d, coarse, lap_c, float(d))
        err = _rel_l2(lap_c, lap_c.from_modal(th_d), theta_true_c)
        sweep.append(dict(delta=float(d), alpha=cfg.effective_alpha(float(d)),
                          theta_rel_error=err, cg_iterations=post_d.cg.iterations))
        errors.append(("theta", float(d), err))
    write_csv(out / "errors.csv", ["field", "delta", "relative_l2_error"], errors)
    files.append("errors.csv")
    manifest.update(
        prior=prior.label, alpha=alpha, delta=data.delta,
        theta_rel_error=errors[0][2], cg_iterations=post.cg.iterations,
        cg_residual=post.cg.residual, gradient_norm=post.gradient_norm,
        noise_sweep=sweep, images=norms, files=sorted(files + ["manifest.json"]))
    return _finish(cfg, manifest)


def _restrict(fine: Mesh, values, coarse: Mesh):
    from .fem import restrict_to_coarse
    return restrict_to_coarse(NodalField(fine, values), coarse).values


# -- link checks -------------------------------------------------------------

def _link_is(cfg, rng):
    basis = SpectralBasis(cfg.modes_per_dim)
    op = IsOperator(basis)
    d, g = basis.dim, basis.eigenvalues

    def g_norm(x):
        return op.range_norm(op.apply(x))

    def sampler(n):
        z = rng.standard_normal((n, 2, d))
        return [(z[i, 0] / g, z[i, 1]) for i in range(n)]

    if cfg.link_choice == "trivial":
        root = matrix_function(op.transformed_matrix(), lambda t: np.sqrt(np.clip(t, 0, None)))

        def psi_norm(x):
            return float(np.linalg.norm(root @ np.concatenate(op.transform(x))))
    elif cfg.link_choice == "is-diag":
        def psi_norm(x):
            return op.domain_norm((basis.power(x[0], -1.0), basis.power(x[1], -1.0)))
    else:
        raise ValueError(f"link choice {cfg.link_choice!r} does not apply to {cfg.problem}")
    # single parameter modes: ||G x|| = 1 while ||psi x|| decays with the mode
    probes = []
    for n in range(min(cfg.n_probes, d)):
        e = np.zeros(d)
        e[n] = 1.0
        probes.append((np.zeros(d), e))
    return psi_norm, g_norm, sampler, probes


def _link_bh(cfg, rng):
    basis = SpectralBasis(cfg.modes_per_dim)
    grid = TimeGrid(cfg.final_time(1.0), cfg.N)
    op = BhOperator(basis, grid)
    d, g = basis.dim, basis.eigenvalues
    w = grid.weights[:, None]

    def g_norm(x):
        return op.range_norm(op.apply(x))

    def sampler(n):
        out = []
        for _ in range(n):
            r = rng.standard_normal((grid.size, d)) * np.sqrt(g / w)
            out.append(BhBlockVector(r, rng.standard_normal(d) / np.sqrt(g)))
        return out

    if cfg.link_choice == "bh-semigroup":
        decay = np.exp(-g * grid.T)
        tq, wq = _state_quadrature(grid)

        def psi_norm(x):
            vals = op.state_at(x.rate, tq) * decay
            a = float(np.sum(wq[:, None] * vals ** 2))
            b = float(np.sum((decay * x.theta) ** 2))
            return np.sqrt(a + b)
    elif cfg.link_choice == "trivial":
        mats = _bh_whitened_normal(op)

        def psi_norm(x):
            f, h = op.transform(x)
            tot = 0.0
            for n in range(d):
                v = np.concatenate([np.sqrt(grid.weights) * f[:, n], [h[n]]])
                tot += float(v @ mats[n] @ v)
            return np.sqrt(tot)
    else:
        raise ValueError(f"link choice {cfg.link_choice!r} does not apply to {cfg.problem}")
    k = min(cfg.n_probes, d)
    probes = []
    for n in range(k):
        r = np.zeros((grid.size, d))
        r[:, n] = np.sqrt(g[n] / grid.T)
        probes.append(BhBlockVector(r, np.zeros(d)))
    return psi_norm, g_norm, sampler, probes


def _state_quadrature(grid: TimeGrid, points: int = 8):
    x, wg = np.polynomial.legendre.leggauss(points)
    ts, ws = [], []
    for lo, hi in zip(grid.lo, grid.hi):
        ts.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * wg)
    return np.concatenate(ts), np.concatenate(ws)


def _bh_whitened_normal(op: BhOperator):
    """Per-mode ``C0 = G*G`` in whitened coordinates, raised to the power 1/2 and squared back.

    Returns the matrices ``psi(C0)^2 = C0`` whose quadratic forms give
    ``||psi(C0) x||^2``; the square root is formed explicitly so the check
    exercises the spectral calculus.
    """
    from .aao_bh import mode_matrix
    out = []
    for gam in op.gamma:
        s = mode_matrix(gam, op.grid, quadrature="exact")
        root = matrix_function(s, lambda t: np.sqrt(np.clip(t, 0, None)))
        out.append(root.T @ root)
    return out


def run_link_check(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    out = _out(cfg)
    rng = np.random.default_rng(cfg.seed)
    build = _link_is if cfg.problem == "inverse_source" else _link_bh
    psi_norm, g_norm, sampler, probes = build(cfg, rng)
    rep = check_link_condition(psi_norm, g_norm, sampler, cfg.n_link_samples, probes)
    write_csv(out / "link_check.csv", ["kind", "index", "ratio"], rep.rows())
    summary = dict(choice=cfg.link_choice, n_samples=rep.n_samples, n_probes=len(rep.probe_ratios),
                   lower=rep.lower, upper=rep.upper, upper_diverges=rep.diverges,
                   skipped=rep.skipped)
    return _finish(cfg, _manifest(cfg, "link-check", summary=summary,
                                  files=["link_check.csv", "manifest.json"]))


# -- squared posterior contraction --------------------------------------------

def spc_instance(cfg: ExperimentConfig):
    """Small inverse-source instance with the trivial prior in orthonormal coordinates.

    Returns the forward matrix ``G`` (orthonormal coordinates of ``U x L2``
    to ``L2 x L2``), the prior root ``(G* G)^{1/2}``, a truth satisfying a
    source condition ``x* = (G* G)^{p/2} v`` and ``||v||``.
    """
    basis = SpectralBasis(cfg.spc_modes)
    d, g = basis.dim, basis.eigenvalues
    eye = np.eye(d)
    # domain coordinates (A u, theta); range (A u - theta, u)
    gm = np.block([[eye, -eye], [np.diag(1.0 / g), np.zeros((d, d))]])
    c0 = gm.T @ gm
    root = matrix_function(c0, np.sqrt)
    v = np.random.default_rng(cfg.seed).standard_normal(2 * d)
    x_true = matrix_function(c0, lambda t: t ** (0.5 * cfg.source_exponent)) @ v
    return gm, root, x_true, float(np.linalg.norm(v))


def run_spc(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    out = _out(cfg)
    gm, root, x_true, m_bar = spc_instance(cfg)
    b = gm @ root
    h = np.linalg.eigvalsh(b.T @ b)
    rows, summary = [], []
    for a in cfg.spc_alphas:
        bound = spc_bound_trivial_prior(h, a, cfg.delta, cfg.source_exponent, m_bar)
        rep = spc_components(x_true, gm, root, a, cfg.delta, cfg.spc_draws, seed=cfg.seed,
                             bound=bound)
        rows.append((a, cfg.delta, rep.bias2, rep.variance, rep.variance_se, rep.spread,
                     rep.spc, rep.spc_se, rep.total, bound))
        summary.append(dict(alpha=a, **{k: v for k, v in rep._asdict().items()}))
    write_csv(out / "spc.csv", ["alpha", "delta", "bias2", "variance", "variance_se", "spread",
                                "spc_mc", "spc_se", "sum_of_parts", "bound"], rows)
    return _finish(cfg, _manifest(cfg, "spc", summary=summary, files=["spc.csv", "manifest.json"]))


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(read_json(path))
