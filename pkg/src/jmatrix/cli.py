"""Command-line driver: INI-style configs in, self-describing CSVs out.

Modes: single, coulomb, multichannel, pmatrix-scan, plateau-scan,
oracle-compare, plus built-in figure presets (fig1..fig8) that tabulate the
standard demonstration curves of the method on the p/n + A=15 case.

Outputs are deterministic: every value is written with shortest
round-trip repr, rows follow the input grid order, and the header block
records all parameters and the package version.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(partial outputs written with flagged rows), 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .basis import OscillatorBasis
from .constants import (E2, HBAR_C, reduced_mass_from_a, sommerfeld_parameter)
from .coulomb import (CoulombProblem, auxiliary_hamiltonian,
                      coulomb_phase_shift, plateau_scan, renormalize)
from .hamiltonian import RadialPotential, diagonalize
from .multichannel import (Channel, CoupledProblem, coupled_hamiltonian,
                           multichannel_coulomb_s, multichannel_renormalize,
                           s_matrix)
from .oracle import (NumerovGrid, extract_phase, integrate_radial,
                     normalized_wave, overlap_coefficient,
                     phase_with_error_estimate)
from .pmatrix import (natural_channel_radius, p_matrix_discrete,
                      p_matrix_general, solve_channel_radius)
from .potentials import (add_coulomb, neutron15_case, p15n_case, square_well,
                         tabulated, woods_saxon)
from .single_channel import coefficients, continuous_phase, phase_shift


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


MODES = ("single", "coulomb", "multichannel", "pmatrix-scan",
         "plateau-scan", "oracle-compare")


@dataclass
class RunConfig:
    """Parsed and validated configuration for one run."""

    mode: str
    hbar_omega: float
    mu: float
    l: int
    n_trunc: int
    smoothing: bool
    potential: RadialPotential | None
    z1z2: float
    b: float
    energies: np.ndarray = field(repr=False)
    a_squared_n: tuple = ()
    pmatrix_radius: str = "natural"
    plateau_b: np.ndarray | None = None
    channels: tuple = ()
    couplings: dict = field(default_factory=dict)
    coupled_radii: tuple = ()
    raw_items: tuple = ()


def _get(cp, section, key, default=None, cast=str):
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
    if default is None and cast is not bool:
        raise ConfigError(f"missing required option [{section}] {key}")
    return default


def _parse_potential(cp, section, l=0, j=None):
    ptype = _get(cp, section, "type")
    if ptype == "square-well":
        depth = _get(cp, section, "depth", cast=float)
        radius = _get(cp, section, "radius", cast=float)
        if radius <= 0:
            raise ConfigError(f"[{section}] radius must be positive, got {radius}")
        return square_well(depth, radius)
    if ptype == "woods-saxon":
        a_target = _get(cp, section, "a_target", cast=float)
        v0 = _get(cp, section, "v0", default=-53.0, cast=float)
        rp = _get(cp, section, "radius_param", default=1.25, cast=float)
        dif = _get(cp, section, "diffuseness", default=0.65, cast=float)
        so = _get(cp, section, "spin_orbit", default=15.0, cast=float)
        if a_target <= 0 or dif <= 0:
            raise ConfigError(f"[{section}] a_target and diffuseness must be positive")
        return woods_saxon(a_target, v0=v0, radius_param=rp, diffuseness=dif,
                           spin_orbit=so, l=l, j=j)
    if ptype == "preset":
        name = _get(cp, section, "name")
        if name == "p15N":
            return p15n_case(l=l, j=j).potential
        if name == "n15":
            return neutron15_case(l=l, j=j).potential
        raise ConfigError(f"unknown preset {name!r} (have: p15N, n15)")
    if ptype == "table":
        fname = _get(cp, section, "file")
        data = np.loadtxt(fname)
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError(f"table file {fname} must have two columns (r, V)")
        return tabulated(data[:, 0], data[:, 1])
    raise ConfigError(f"unknown potential type {ptype!r}")


def _mini_potential(spec: str):
    """Inline potential spec 'square-well:<depth>:<radius>' for coupling blocks."""
    parts = spec.split(":")
    if parts[0] == "square-well" and len(parts) == 3:
        return square_well(float(parts[1]), float(parts[2]))
    if parts[0] == "none":
        return None
    raise ConfigError(f"unsupported coupling potential spec {spec!r}")


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    mode = _get(cp, "run", "mode")
    if mode not in MODES:
        raise ConfigError(f"[run] mode must be one of {MODES}, got {mode!r}")
    hbar_omega = _get(cp, "basis", "hbar_omega", default=18.0, cast=float)
    if hbar_omega <= 0:
        raise ConfigError(f"[basis] hbar_omega must be positive, got {hbar_omega}")
    if cp.has_option("basis", "mu"):
        mu = _get(cp, "basis", "mu", cast=float)
    else:
        mass_a = _get(cp, "basis", "mass_a", default=1.0, cast=float)
        mass_b = _get(cp, "basis", "mass_b", default=15.0, cast=float)
        mu = reduced_mass_from_a(mass_a, mass_b)
    if mu <= 0:
        raise ConfigError(f"[basis] reduced mass must be positive, got {mu}")
    l = _get(cp, "basis", "l", default=0, cast=int)
    if l < 0:
        raise ConfigError(f"[basis] l must be >= 0, got {l}")
    n_trunc = _get(cp, "basis", "n_trunc", default=10, cast=int)
    if n_trunc < 0:
        raise ConfigError(f"[basis] n_trunc must be >= 0, got {n_trunc}")
    smoothing = _get(cp, "basis", "smoothing", default=False, cast=bool)
    j = (_get(cp, "potential", "j", cast=float)
         if cp.has_option("potential", "j") else None)
    potential = None
    z1z2 = 0.0
    if cp.has_section("potential"):
        potential = _parse_potential(cp, "potential", l=l, j=j)
        z1z2 = _get(cp, "potential", "z1z2", default=0.0, cast=float)
    elif mode != "multichannel":
        raise ConfigError(f"mode {mode} requires a [potential] section")
    e_min = _get(cp, "energies", "min", default=0.5, cast=float)
    e_max = _get(cp, "energies", "max", default=30.0, cast=float)
    count = _get(cp, "energies", "count", default=60, cast=int)
    log = _get(cp, "energies", "log", default=False, cast=bool)
    if not (0.0 < e_min <= e_max):
        raise ConfigError(f"[energies] need 0 < min <= max, got {e_min}, {e_max}")
    if count < 1:
        raise ConfigError(f"[energies] count must be >= 1, got {count}")
    energies = (np.geomspace(e_min, e_max, count) if log
                else np.linspace(e_min, e_max, count))
    b = _get(cp, "coulomb", "b", default=7.0, cast=float) \
        if cp.has_section("coulomb") else 7.0
    if b <= 0:
        raise ConfigError(f"[coulomb] b must be positive, got {b}")
    a_sq = ()
    if cp.has_option("output", "a_squared_n"):
        a_sq = tuple(int(tok) for tok in
                     cp.get("output", "a_squared_n").replace(",", " ").split())
        if any(n < 0 for n in a_sq):
            raise ConfigError("[output] a_squared_n entries must be >= 0")
    pm_radius = _get(cp, "pmatrix", "radius", default="natural") \
        if cp.has_section("pmatrix") else "natural"
    plateau_b = None
    if cp.has_section("plateau"):
        b_lo = _get(cp, "plateau", "b_min", cast=float)
        b_hi = _get(cp, "plateau", "b_max", cast=float)
        n_b = _get(cp, "plateau", "count", default=36, cast=int)
        if not (0 < b_lo < b_hi):
            raise ConfigError("[plateau] need 0 < b_min < b_max")
        plateau_b = np.linspace(b_lo, b_hi, n_b)
    channels = ()
    couplings = {}
    coupled_radii = ()
    if mode == "multichannel":
        n_ch = _get(cp, "channels", "count", cast=int)
        if n_ch < 1:
            raise ConfigError("[channels] count must be >= 1")
        chs = []
        for i in range(1, n_ch + 1):
            sec = f"channel.{i}"
            if not cp.has_section(sec):
                raise ConfigError(f"missing section [{sec}]")
            li = _get(cp, sec, "l", default=0, cast=int)
            if cp.has_option(sec, "mu"):
                mui = _get(cp, sec, "mu", cast=float)
            else:
                mui = reduced_mass_from_a(
                    _get(cp, sec, "mass_a", default=1.0, cast=float),
                    _get(cp, sec, "mass_b", default=15.0, cast=float))
            chs.append(Channel(
                l=li, mu=mui,
                threshold=_get(cp, sec, "threshold", default=0.0, cast=float),
                z1z2=_get(cp, sec, "z1z2", default=0.0, cast=float),
                n_trunc=_get(cp, sec, "n_trunc", default=10, cast=int),
                hbar_omega=_get(cp, sec, "hbar_omega", default=18.0, cast=float)))
        channels = tuple(chs)
        for i in range(1, n_ch + 1):
            for jj in range(i, n_ch + 1):
                key = f"v.{i}.{jj}"
                if cp.has_option("coupling", key):
                    couplings[(i - 1, jj - 1)] = _mini_potential(
                        cp.get("coupling", key))
        if cp.has_option("coupling", "radii"):
            coupled_radii = tuple(
                float(tok) for tok in
                cp.get("coupling", "radii").replace(",", " ").split())
            if len(coupled_radii) != n_ch:
                raise ConfigError("[coupling] radii must list one value per channel")
    raw_items = tuple((s, k, v) for s in cp.sections()
                      for k, v in sorted(cp.items(s)))
    return RunConfig(mode=mode, hbar_omega=hbar_omega, mu=mu, l=l,
                     n_trunc=n_trunc, smoothing=smoothing,
                     potential=potential, z1z2=z1z2, b=b, energies=energies,
                     a_squared_n=a_sq, pmatrix_radius=pm_radius,
                     plateau_b=plateau_b, channels=channels,
                     couplings=couplings, coupled_radii=coupled_radii,
                     raw_items=raw_items)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, header_params, columns, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# jmatrix {__version__}\n")
        for key, val in header_params:
            fh.write(f"# {key} = {val}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _default_grid(cfg) -> NumerovGrid:
    r_max = max(30.0, cfg.potential.range_hint + 16.0 if cfg.potential else 30.0)
    h = 0.002
    return NumerovGrid(r_min=h, r_max=r_max, h=h, r_match=r_max - 6.0)


def _map_grid(fn, values, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


def run(cfg: RunConfig, out_dir: Path, threads: int = 1) -> int:
    """Execute one configured computation; returns the exit code."""
    out_dir.mkdir(parents=True, exist_ok=True)
    header = [(f"{s}.{k}", v) for s, k, v in cfg.raw_items]
    basis = OscillatorBasis(cfg.hbar_omega, cfg.mu, cfg.l)
    failures = []

    if cfg.mode == "single":
        h = diagonalize(basis, cfg.potential, cfg.n_trunc, smoothing=cfg.smoothing)
        deltas = []
        rows = []
        for energy in cfg.energies:
            try:
                sol = coefficients(h, energy)
                deltas.append(sol.delta)
                extra = [sol.a[n] ** 2 for n in cfg.a_squared_n]
                rows.append([energy, sol.k, sol.delta] + extra)
            except Exception as exc:  # noqa: BLE001 - flagged per row
                failures.append((energy, repr(exc)))
                deltas.append(math.nan)
                rows.append([energy, math.nan, math.nan]
                            + [math.nan] * len(cfg.a_squared_n))
        cont = continuous_phase([d for d in deltas])
        for row, dc in zip(rows, cont):
            row.insert(3, dc)
        cols = ["E_MeV", "k_fm1", "delta_rad", "delta_continuous"] \
            + [f"a{n}_sq" for n in cfg.a_squared_n]
        write_csv(out_dir / "single.csv", header, cols, rows)

    elif cfg.mode == "coulomb":
        prob = CoulombProblem(nuclear=cfg.potential, z1z2=cfg.z1z2, b=cfg.b,
                              basis=basis, n_trunc=cfg.n_trunc)
        h_aux = auxiliary_hamiltonian(prob, smoothing=cfg.smoothing)
        deltas = []
        rows = []
        for energy in cfg.energies:
            try:
                delta, eta = coulomb_phase_shift(prob, h_aux, energy)
                k = math.sqrt(2.0 * cfg.mu * energy) / HBAR_C
                extra = []
                if cfg.a_squared_n:
                    sol = coefficients(h_aux, energy,
                                       n_asym=max(cfg.a_squared_n) + 60)
                    n_ren, _, _ = renormalize(prob, h_aux, energy, sol_aux=sol,
                                              r_grid=np.empty(0))
                    extra = [(n_ren * sol.a[n]) ** 2 for n in cfg.a_squared_n]
                deltas.append(delta)
                rows.append([energy, k, delta, eta, delta + eta] + extra)
            except Exception as exc:  # noqa: BLE001
                failures.append((energy, repr(exc)))
                deltas.append(math.nan)
                rows.append([energy] + [math.nan] * (4 + len(cfg.a_squared_n)))
        cont = continuous_phase(deltas)
        for row, dc in zip(rows, cont):
            row.insert(3, dc)
        cols = ["E_MeV", "k_fm1", "delta_rad", "delta_continuous", "eta_rad",
                "delta_plus_eta"] + [f"a{n}_sq" for n in cfg.a_squared_n]
        write_csv(out_dir / "coulomb.csv", header, cols, rows)

    elif cfg.mode == "oracle-compare":
        grid = _default_grid(cfg)
        if cfg.z1z2 != 0.0:
            prob = CoulombProblem(nuclear=cfg.potential, z1z2=cfg.z1z2,
                                  b=cfg.b, basis=basis, n_trunc=cfg.n_trunc)
            h_aux = auxiliary_hamiltonian(prob, smoothing=cfg.smoothing)
            full = add_coulomb(cfg.potential, cfg.z1z2)
            zk = 2.0 * cfg.mu * cfg.z1z2 * E2 / HBAR_C ** 2
        else:
            h = diagonalize(basis, cfg.potential, cfg.n_trunc,
                            smoothing=cfg.smoothing)
            full = cfg.potential
            zk = 0.0

        def one(energy):
            k = math.sqrt(2.0 * cfg.mu * energy) / HBAR_C
            zeta = (sommerfeld_parameter(cfg.z1z2, cfg.mu, k)
                    if cfg.z1z2 else 0.0)
            if cfg.z1z2 != 0.0:
                d_h, _ = coulomb_phase_shift(prob, h_aux, energy)
            else:
                d_h = phase_shift(h, energy)
            d_o, err = phase_with_error_estimate(full, cfg.l, energy, grid,
                                                 cfg.mu, zeta, zk)
            diff = (d_h - d_o + math.pi / 2) % math.pi - math.pi / 2
            return [energy, d_h, d_o, diff, err]

        rows = []
        for energy, res in zip(cfg.energies,
                               _map_grid(lambda e: _safe(one, e, failures),
                                         cfg.energies, threads)):
            rows.append(res if res is not None
                        else [energy] + [math.nan] * 4)
        cols = ["E_MeV", "delta_horse", "delta_oracle", "diff", "oracle_err_est"]
        write_csv(out_dir / "oracle_compare.csv", header, cols, rows)

    elif cfg.mode == "pmatrix-scan":
        h = diagonalize(basis, cfg.potential, cfg.n_trunc, smoothing=cfg.smoothing)
        if cfg.pmatrix_radius == "natural":
            b_of = lambda energy: natural_channel_radius(basis, cfg.n_trunc)
        elif cfg.pmatrix_radius == "exact":
            b0 = natural_channel_radius(basis, cfg.n_trunc)
            b_of = lambda energy: solve_channel_radius(h, energy, 0, near=b0).b
        else:
            bval = float(cfg.pmatrix_radius)
            b_of = lambda energy: bval
        rows = []
        eigs = [e for e in h.eigenvalues if e > 0]
        spacing = (cfg.energies[-1] - cfg.energies[0]) / max(len(cfg.energies) - 1, 1)
        near_band = max(0.05, 0.51 * spacing)
        for energy in cfg.energies:
            try:
                b = b_of(energy)
                res = p_matrix_general(h, energy, b)
                pd = p_matrix_discrete(h, energy)
                near_eig = min((abs(energy - e) for e in eigs), default=math.inf)
                rows.append([energy, b, res.P, pd, int(res.is_pole),
                             int(near_eig < near_band)])
            except Exception as exc:  # noqa: BLE001
                failures.append((energy, repr(exc)))
                rows.append([energy] + [math.nan] * 3 + [0, 0])
        hdr = header + [("eigenvalues_MeV",
                         " ".join(repr(float(e)) for e in h.eigenvalues))]
        cols = ["E_MeV", "b_fm", "P_exact", "P_discrete", "pole_flag",
                "near_eigenvalue"]
        write_csv(out_dir / "pmatrix_scan.csv", hdr, cols, rows)

    elif cfg.mode == "plateau-scan":
        if cfg.plateau_b is None:
            raise ConfigError("plateau-scan requires a [plateau] section")
        rows = []
        for energy in cfg.energies:
            scan = plateau_scan(cfg.potential, cfg.z1z2, basis, cfg.n_trunc,
                                energy, cfg.plateau_b, smoothing=cfg.smoothing)
            for b, d, w in zip(scan.b_values, scan.deltas, scan.in_window):
                rows.append([energy, b, d, int(w)])
        cols = ["E_MeV", "b_fm", "delta_rad", "in_window"]
        write_csv(out_dir / "plateau_scan.csv", header, cols, rows)

    elif cfg.mode == "multichannel":
        problem = _build_coupled(cfg)
        charged = any(ch.z1z2 != 0.0 for ch in cfg.channels)
        radii = cfg.coupled_radii
        if charged and not radii:
            raise ConfigError("charged multichannel runs need [coupling] radii")
        h = None if charged else coupled_hamiltonian(problem)
        m = problem.m
        rows = []
        for energy in cfg.energies:
            try:
                if charged:
                    smat, _ = multichannel_coulomb_s(problem, energy, radii)
                else:
                    smat = s_matrix(h, energy)
                s = smat.matrix
                row = [energy] + list(smat.eigenphases())
                for i in range(m):
                    for jj in range(m):
                        row.extend([s[i, jj].real, s[i, jj].imag])
                row.append(smat.unitarity_defect())
                rows.append(row)
            except Exception as exc:  # noqa: BLE001
                failures.append((energy, repr(exc)))
                rows.append([energy] + [math.nan] * (m + 2 * m * m + 1))
        cols = ["E_MeV"] + [f"eigenphase{i}" for i in range(m)]
        for i in range(m):
            for jj in range(m):
                cols.extend([f"S{i}{jj}_re", f"S{i}{jj}_im"])
        cols.append("unitarity_defect")
        write_csv(out_dir / "multichannel.csv", header, cols, rows)

    else:  # pragma: no cover - guarded by load_config
        raise ConfigError(f"unhandled mode {cfg.mode}")

    if failures:
        sys.stderr.write(f"{len(failures)} grid point(s) failed; "
                         "rows flagged with nan\n")
        for energy, msg in failures[:10]:
            sys.stderr.write(f"  E = {energy}: {msg}\n")
        return 3
    return 0


def _safe(fn, value, failures):
    try:
        return fn(value)
    except Exception as exc:  # noqa: BLE001
        failures.append((value, repr(exc)))
        return None


def _build_coupled(cfg: RunConfig) -> CoupledProblem:
    m = len(cfg.channels)
    blocks = [[None] * m for _ in range(m)]
    for (i, jj), pot in cfg.couplings.items():
        blocks[i][jj] = pot
        blocks[jj][i] = pot
    return CoupledProblem(channels=cfg.channels,
                          potentials=tuple(tuple(row) for row in blocks))


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

def figure_data(preset: str, out_dir: Path) -> int:
    """Emit the CSV behind one of the built-in demonstration figures."""
    out_dir.mkdir(parents=True, exist_ok=True)
    fn = _FIGURES.get(preset)
    if fn is None:
        raise ConfigError(f"unknown preset {preset!r}; have {sorted(_FIGURES)}")
    fn(out_dir)
    return 0


def _fig1(out_dir: Path) -> None:
    """Relative deviation (b0 - b)/b of the natural channel radius vs E."""
    mu = reduced_mass_from_a(1, 15)
    es = np.linspace(1.0, 30.0, 59)
    n_values = (0, 4, 9)
    l_values = (0, 1, 4)
    cols = ["E_MeV"]
    series = []
    for n in n_values:
        for l in l_values:
            basis = OscillatorBasis(18.0, mu, l)
            h = diagonalize(basis, None, n)
            b0 = natural_channel_radius(basis, n)
            dev = [(b0 - solve_channel_radius(h, e, 0, near=b0).b)
                   / solve_channel_radius(h, e, 0, near=b0).b for e in es]
            series.append(dev)
            cols.append(f"dev_N{n}_l{l}")
    rows = [[e] + [s[i] for s in series] for i, e in enumerate(es)]
    write_csv(out_dir / "fig1.csv",
              [("preset", "fig1"), ("hbar_omega", 18.0), ("kinematics", "n+A15")],
              cols, rows)


def _fig2(out_dir: Path) -> None:
    """Exact P-matrix at the natural radius vs its discrete analogue."""
    mu = reduced_mass_from_a(1, 15)
    basis = OscillatorBasis(18.0, mu, 0)
    ws = woods_saxon(15.0)
    es = np.linspace(0.25, 30.0, 120)
    cols = ["E_MeV"]
    series = []
    for n in (1, 9):
        h = diagonalize(basis, ws, n)
        b0 = natural_channel_radius(basis, n)
        pex, pdis = [], []
        for e in es:
            try:
                res = p_matrix_general(h, e, b0)
                pex.append(res.P if not res.is_pole else math.inf)
                pdis.append(p_matrix_discrete(h, e))
            except Exception:  # noqa: BLE001 - pole guard
                pex.append(math.nan)
                pdis.append(math.nan)
        series.extend([pex, pdis])
        cols.extend([f"P_exact_N{n}", f"P_discrete_N{n}"])
    rows = [[e] + [s[i] for s in series] for i, e in enumerate(es)]
    write_csv(out_dir / "fig2.csv",
              [("preset", "fig2"), ("potential", "woods-saxon n+A15 defaults")],
              cols, rows)


def _fig3(out_dir: Path) -> None:
    """delta_0(b) plateaus for the p + A15 case at E = 2 and 10 MeV."""
    case = p15n_case(l=0)
    bs = np.linspace(4.0, 11.0, 36)
    variants = [("hw18_N4", 18.0, 4), ("hw18_N9", 18.0, 9), ("hw18_N19", 18.0, 19),
                ("hw10_N9", 10.0, 9), ("hw26_N9", 26.0, 9)]
    rows = []
    for energy in (2.0, 10.0):
        scans = []
        for _, hw, n in variants:
            basis = OscillatorBasis(hw, case.mu, 0)
            scans.append(plateau_scan(case.potential, case.z1z2, basis, n,
                                      energy, bs))
        for i, b in enumerate(bs):
            rows.append([energy, b] + [s.deltas[i] for s in scans])
    cols = ["E_MeV", "b_fm"] + [f"delta_{name}" for name, _, _ in variants]
    write_csv(out_dir / "fig3.csv",
              [("preset", "fig3"), ("case", "p+A15 s-wave")], cols, rows)


def _coulomb_sweep(case, n_trunc, es, b=7.0, l=0):
    basis = OscillatorBasis(18.0, case.mu, l)
    prob = CoulombProblem(nuclear=case.potential, z1z2=case.z1z2, b=b,
                          basis=basis, n_trunc=n_trunc, enforce_window=False)
    h_aux = auxiliary_hamiltonian(prob)
    out = []
    for energy in es:
        out.append(coulomb_phase_shift(prob, h_aux, energy)[0])
    return prob, h_aux, out


def _oracle_sweep(case, es, l=0):
    full = add_coulomb(case.potential, case.z1z2)
    zk = 2.0 * case.mu * case.z1z2 * E2 / HBAR_C ** 2
    grid = NumerovGrid(r_min=0.002, r_max=30.0, h=0.002, r_match=24.0)
    out = []
    for energy in es:
        k = math.sqrt(2.0 * case.mu * energy) / HBAR_C
        zeta = sommerfeld_parameter(case.z1z2, case.mu, k) if case.z1z2 else 0.0
        u = integrate_radial(full, l, energy, grid, case.mu, zk)
        out.append(extract_phase(u, l, k, zeta, grid)[0])
    return grid, full, zk, out


def _fig4(out_dir: Path) -> None:
    """s-wave p + A15 phase shift vs energy: oracle and N = 4, 6, 8, 10."""
    case = p15n_case(l=0)
    es = np.linspace(0.3, 30.0, 120)
    _, _, _, exact = _oracle_sweep(case, es)
    series = [continuous_phase(exact)]
    cols = ["E_MeV", "delta_oracle"]
    for n in (10, 8, 6, 4):
        _, _, d = _coulomb_sweep(case, n, es)
        series.append(continuous_phase(d))
        cols.append(f"delta_N{n}")
    rows = [[e] + [s[i] for s in series] for i, e in enumerate(es)]
    write_csv(out_dir / "fig4.csv",
              [("preset", "fig4"), ("case", "p+A15 s-wave b=7fm")], cols, rows)


def _fig5(out_dir: Path) -> None:
    """a_n^2 for n = 0, 1, 2 vs energy: overlap oracle and HORSE."""
    case = p15n_case(l=0)
    es = np.linspace(0.3, 30.0, 60)
    grid, full, zk, _ = _oracle_sweep(case, es[:1])
    basis = OscillatorBasis(18.0, case.mu, 0)
    prob = CoulombProblem(nuclear=case.potential, z1z2=case.z1z2, b=7.0,
                          basis=basis, n_trunc=10)
    h_aux = auxiliary_hamiltonian(prob)
    rows = []
    for energy in es:
        k = math.sqrt(2.0 * case.mu * energy) / HBAR_C
        zeta = sommerfeld_parameter(case.z1z2, case.mu, k)
        r, ub, _ = normalized_wave(full, 0, energy, grid, case.mu, zeta, zk)
        sol = coefficients(h_aux, energy, n_asym=70)
        n_ren, _, _ = renormalize(prob, h_aux, energy, sol_aux=sol,
                                  r_grid=np.empty(0))
        row = [energy]
        for n in (0, 1, 2):
            a_o = overlap_coefficient(r, ub, 18.0, case.mu, 0, n)
            row.extend([a_o ** 2, (n_ren * sol.a[n]) ** 2])
        rows.append(row)
    cols = ["E_MeV", "a0_sq_oracle", "a0_sq_horse", "a1_sq_oracle",
            "a1_sq_horse", "a2_sq_oracle", "a2_sq_horse"]
    write_csv(out_dir / "fig5.csv",
              [("preset", "fig5"), ("case", "p+A15 s-wave b=7fm N=10")],
              cols, rows)


def _fig6(out_dir: Path) -> None:
    """Reconstructed radial wave at E = 3 and 15 MeV: M = N vs M = 100."""
    case = p15n_case(l=0)
    basis = OscillatorBasis(18.0, case.mu, 0)
    prob = CoulombProblem(nuclear=case.potential, z1z2=case.z1z2, b=7.0,
                          basis=basis, n_trunc=10)
    h_aux = auxiliary_hamiltonian(prob)
    grid = NumerovGrid(r_min=0.002, r_max=30.0, h=0.002, r_match=24.0)
    full = add_coulomb(case.potential, case.z1z2)
    zk = 2.0 * case.mu * case.z1z2 * E2 / HBAR_C ** 2
    rg = np.linspace(0.02, 10.0, 250)
    rows = []
    for energy in (3.0, 15.0):
        k = math.sqrt(2.0 * case.mu * energy) / HBAR_C
        zeta = sommerfeld_parameter(case.z1z2, case.mu, k)
        r, ub, _ = normalized_wave(full, 0, energy, grid, case.mu, zeta, zk)
        u_exact = np.interp(rg, r, ub)
        sol = coefficients(h_aux, energy, n_asym=110)
        _, _, w100 = renormalize(prob, h_aux, energy, sol_aux=sol,
                                 r_grid=rg, m_max=100)
        _, _, w10 = renormalize(prob, h_aux, energy, sol_aux=sol,
                                r_grid=rg, m_max=10)
        for i, rr in enumerate(rg):
            rows.append([energy, rr, u_exact[i], w10[i], w100[i]])
    cols = ["E_MeV", "r_fm", "u_exact", "u_M_eq_N", "u_M100"]
    write_csv(out_dir / "fig6.csv",
              [("preset", "fig6"), ("case", "p+A15 s-wave b=7fm N=10")],
              cols, rows)


def _fig78(out_dir: Path, l: int, name: str) -> None:
    case = p15n_case(l=l)
    es = np.linspace(0.3, 30.0, 60)
    _, full, zk, exact = _oracle_sweep(case, es, l=l)
    grid = NumerovGrid(r_min=0.002, r_max=30.0, h=0.002, r_match=24.0)
    basis = OscillatorBasis(18.0, case.mu, l)
    prob = CoulombProblem(nuclear=case.potential, z1z2=case.z1z2, b=7.0,
                          basis=basis, n_trunc=10)
    h_aux = auxiliary_hamiltonian(prob)
    rows = []
    for i, energy in enumerate(es):
        delta, _ = coulomb_phase_shift(prob, h_aux, energy)
        k = math.sqrt(2.0 * case.mu * energy) / HBAR_C
        zeta = sommerfeld_parameter(case.z1z2, case.mu, k)
        r, ub, _ = normalized_wave(full, l, energy, grid, case.mu, zeta, zk)
        a_o = overlap_coefficient(r, ub, 18.0, case.mu, l, 1)
        sol = coefficients(h_aux, energy, n_asym=70)
        n_ren, _, _ = renormalize(prob, h_aux, energy, sol_aux=sol,
                                  r_grid=np.empty(0))
        rows.append([energy, exact[i], delta, a_o ** 2,
                     (n_ren * sol.a[1]) ** 2])
    cols = ["E_MeV", "delta_oracle", "delta_horse", "a1_sq_oracle",
            "a1_sq_horse"]
    write_csv(out_dir / f"{name}.csv",
              [("preset", name), ("case", f"p+A15 l={l} b=7fm N=10")],
              cols, rows)


_FIGURES = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": lambda out: _fig78(out, 1, "fig7"),
    "fig8": lambda out: _fig78(out, 2, "fig8"),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jmatrix",
        description="Oscillator-basis scattering solver (J-matrix / HORSE)")
    parser.add_argument("config", nargs="?", help="INI-style run configuration")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--preset", help="figure preset fig1..fig8")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for energy sweeps")
    args = parser.parse_args(argv)
    out_dir = Path(args.out)
    try:
        if args.preset:
            return figure_data(args.preset, out_dir)
        if not args.config:
            parser.error("a config path or --preset is required")
        cfg = load_config(args.config)
        return run(cfg, out_dir, threads=max(args.threads, 1))
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return 4
    except Exception as exc:  # noqa: BLE001 - numerical failure
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
