"""Command-line surface: forward solves, inversion, functionals, SCF, and
the verification scenarios, all driven by a single JSON config document.

Exit codes: 0 on success (and scenario pass), 1 on invalid configuration,
2 on numerical non-convergence (and scenario failure).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .grid import (BoundaryCondition, Density, ExternalPotential, Grid,
                   GridFunction, Interaction, integrate, pair_external)
from .inversion import (ConvergenceError, InversionProblem, TargetClassError,
                        invert, parity_matches)
from .kohnsham import ks_kinetic, ks_scf, levy_lieb, xc_energy
from .manybody import (assemble_many_body, build_basis, density, ground_state,
                       pair_density)
from .representability import classify_density, slater_from_density
from .serialize import save_json, write_csv
from .verify import run_scenario, scenario_names

__all__ = ["main"]


class ConfigError(ValueError):
    """Invalid run configuration, with the offending key in the message."""


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _get(cfg: dict, key: str, default=None, required: bool = False):
    if key in cfg:
        return cfg[key]
    if required:
        raise ConfigError(f"missing required config key {key!r}")
    return default


def _build_grid(cfg: dict) -> Grid:
    n = int(_get(cfg, "n_cells", 400))
    try:
        return Grid(n)
    except ValueError as exc:
        raise ConfigError(f"n_cells: {exc}") from exc


def _build_bc(cfg: dict) -> BoundaryCondition:
    try:
        return BoundaryCondition.parse(_get(cfg, "bc", "neumann"))
    except ValueError as exc:
        raise ConfigError(f"bc: {exc}") from exc


def _regular_values(grid: Grid, spec) -> np.ndarray:
    x = grid.nodes
    if spec is None or spec == "zero":
        return np.zeros(grid.n_nodes)
    if isinstance(spec, list):
        arr = np.asarray(spec, dtype=float)
        if arr.shape != (grid.n_nodes,):
            raise ConfigError(f"potential.regular: expected {grid.n_nodes} "
                              f"nodal values, got {len(arr)}")
        return arr
    if not isinstance(spec, dict):
        raise ConfigError("potential.regular: expected a preset object or a "
                          "nodal array")
    name = spec.get("name")
    if name == "zero":
        return np.zeros(grid.n_nodes)
    if name == "constant":
        return float(spec.get("value", 0.0)) * np.ones(grid.n_nodes)
    if name in ("cos", "sin"):
        amp = float(spec.get("amplitude", 1.0))
        freq = float(spec.get("frequency", 1))
        fn = np.cos if name == "cos" else np.sin
        return amp * fn(2 * np.pi * freq * x)
    if name == "trig":
        vals = np.zeros(grid.n_nodes)
        for i, term in enumerate(spec.get("terms", [])):
            try:
                amp, freq, kind = term
            except Exception as exc:
                raise ConfigError(
                    f"potential.regular.terms[{i}]: expected "
                    "[amplitude, frequency, 'cos'|'sin']") from exc
            fn = {"cos": np.cos, "sin": np.sin}.get(kind)
            if fn is None:
                raise ConfigError(f"potential.regular.terms[{i}]: unknown "
                                  f"term kind {kind!r}")
            vals += float(amp) * fn(2 * np.pi * float(freq) * x)
        return vals
    raise ConfigError(f"potential.regular: unknown preset {name!r}")


def _build_potential(grid: Grid, cfg: dict, key: str = "potential"
                     ) -> ExternalPotential:
    spec = _get(cfg, key) or {}
    if not isinstance(spec, dict):
        raise ConfigError(f"{key}: expected an object")
    values = _regular_values(grid, spec.get("regular"))
    regular = GridFunction(grid, values) if np.any(values) else None
    deltas = []
    for i, pair in enumerate(spec.get("deltas", [])):
        try:
            pos, weight = float(pair[0]), float(pair[1])
        except Exception as exc:
            raise ConfigError(f"{key}.deltas[{i}]: expected "
                              "[position, weight]") from exc
        deltas.append((pos, weight))
    try:
        return ExternalPotential(regular, deltas,
                                 float(spec.get("constant", 0.0)))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _build_interaction(grid: Grid, cfg: dict) -> Interaction:
    spec = _get(cfg, "interaction") or {"kind": "zero"}
    if not isinstance(spec, dict):
        raise ConfigError("interaction: expected an object")
    kind = spec.get("kind", "zero")
    try:
        if kind == "zero":
            return Interaction.zero()
        if kind == "cos_convolution":
            s = float(spec.get("strength", 1.0))
            freq = float(spec.get("frequency", 1))
            return Interaction.convolution_from_callable(
                grid, lambda t: s * np.cos(2 * np.pi * freq * t))
        if kind == "convolution":
            return Interaction.convolution(np.asarray(spec["samples"], float))
        if kind == "constant_kernel":
            c = float(spec.get("value", 1.0))
            return Interaction.general(np.full((grid.n_nodes, grid.n_nodes), c))
        if kind == "general":
            return Interaction.general(np.asarray(spec["samples"], float))
    except KeyError as exc:
        raise ConfigError(f"interaction: missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"interaction: {exc}") from exc
    raise ConfigError(f"interaction.kind: unknown kind {kind!r}")


def _build_target_density(grid: Grid, cfg: dict, basis, w) -> Density:
    spec = _get(cfg, "target", required=True)
    if not isinstance(spec, dict):
        raise ConfigError("target: expected an object")
    n = int(_get(cfg, "particles", required=True))
    if "values" in spec:
        arr = np.asarray(spec["values"], dtype=float)
        if arr.shape != (grid.n_nodes,):
            raise ConfigError(f"target.values: expected {grid.n_nodes} values")
        try:
            return Density.from_samples(grid, arr, n,
                                        normalize=bool(spec.get("normalize", True)))
        except ValueError as exc:
            raise ConfigError(f"target.values: {exc}") from exc
    if "potential" in spec:
        v = _build_potential(grid, spec, key="potential")
        gs = ground_state(assemble_many_body(v, w, basis, n))
        return density(gs.psi)
    raise ConfigError("target: provide either 'values' or 'potential'")


def _check_parity(cfg: dict, bc: BoundaryCondition, n: int) -> bool:
    if parity_matches(bc, n):
        return True
    if bool(_get(cfg, "allow_parity_violation", False)):
        print(f"warning: {n} particles with {bc.value} boundary conditions "
              "fall outside the parity regime; guarantees degrade to "
              "best-effort", file=sys.stderr)
        return False
    raise ConfigError(
        f"{n} particles with {bc.value} boundary conditions violate the "
        "parity rule; set allow_parity_violation to proceed anyway")


def cmd_solve(cfg: dict, out: str | None) -> int:
    grid = _build_grid(cfg)
    bc = _build_bc(cfg)
    n = int(_get(cfg, "particles", required=True))
    k = int(_get(cfg, "basis_size", 10))
    basis = build_basis(bc, grid, k)
    v = _build_potential(grid, cfg)
    w = _build_interaction(grid, cfg)
    gs = ground_state(assemble_many_body(v, w, basis, n))
    rho = density(gs.psi)
    result = {
        "energy": gs.energy,
        "gap": gs.gap,
        "n_cells": grid.n_cells,
        "particles": n,
        "bc": bc.value,
        "density": rho.values.tolist(),
    }
    if n >= 2:
        result["pair_density_diagonal"] = np.diag(pair_density(gs.psi)).tolist()
    save_json(result, out)
    csv_path = _get(cfg, "csv")
    if csv_path:
        write_csv(csv_path, ["x", "density"],
                  zip(grid.nodes.tolist(), rho.values.tolist()))
    return 0


def cmd_invert(cfg: dict, out: str | None) -> int:
    grid = _build_grid(cfg)
    bc = _build_bc(cfg)
    k = int(_get(cfg, "basis_size", 10))
    basis = build_basis(bc, grid, k)
    w = _build_interaction(grid, cfg)
    target = _build_target_density(grid, cfg, basis, w)
    _check_parity(cfg, bc, target.n_particles)
    prob = InversionProblem(
        target=target, w=w, bc=bc, basis=basis,
        grad_tol=float(_get(cfg, "grad_tol", 1e-7)),
        max_iters=int(_get(cfg, "max_iters", 600)),
        enforce_parity=False)
    v0 = _get(cfg, "seed_potential")
    if v0 is not None:
        v0 = _regular_values(grid, v0)
    res = invert(prob, v0=v0)
    save_json(res, out)
    csv_path = _get(cfg, "csv")
    if csv_path:
        write_csv(csv_path, ["iteration", "residual"],
                  enumerate(res.residual_history))
    return 0 if res.converged else 2


def cmd_fll(cfg: dict, out: str | None) -> int:
    grid = _build_grid(cfg)
    bc = _build_bc(cfg)
    k = int(_get(cfg, "basis_size", 10))
    basis = build_basis(bc, grid, k)
    w = _build_interaction(grid, cfg)
    target = _build_target_density(grid, cfg, basis, w)
    _check_parity(cfg, bc, target.n_particles)
    fv = xc_energy(target, w, bc, basis,
                   grad_tol=float(_get(cfg, "grad_tol", 1e-8)),
                   max_iters=int(_get(cfg, "max_iters", 600)),
                   strict=False)
    save_json(fv, out)
    csv_path = _get(cfg, "csv")
    if csv_path:
        write_csv(csv_path, ["x", "v_int", "v_ks"],
                  zip(grid.nodes.tolist(),
                      fv.v_int.regular_values(grid).tolist(),
                      fv.v_ks.regular_values(grid).tolist()))
    ok = fv.diagnostics["interacting_converged"] \
        and fv.diagnostics["noninteracting_converged"]
    return 0 if ok else 2


def cmd_ks_scf(cfg: dict, out: str | None) -> int:
    grid = _build_grid(cfg)
    bc = _build_bc(cfg)
    n = int(_get(cfg, "particles", required=True))
    parity_ok = _check_parity(cfg, bc, n)
    v = _build_potential(grid, cfg)
    w = _build_interaction(grid, cfg)
    ks = ks_scf(v, w, bc, n, grid=grid, k=int(_get(cfg, "basis_size", 10)),
                mixing=float(_get(cfg, "mixing", 0.5)),
                max_iters=int(_get(cfg, "max_iters", 60)),
                scf_tol=float(_get(cfg, "scf_tol", 1e-6)),
                enforce_parity=parity_ok,
                mix_densities=bool(_get(cfg, "mix_densities", False)))
    save_json(ks, out)
    csv_path = _get(cfg, "csv")
    if csv_path:
        write_csv(csv_path, ["iteration", "residual", "energy"],
                  [(row["iteration"], row["residual"], row["energy"])
                   for row in ks.trace])
    return 0 if ks.converged else 2


def cmd_density_to_slater(cfg: dict, out: str | None) -> int:
    grid = _build_grid(cfg)
    bc = _build_bc(cfg)
    w = Interaction.zero()
    k = int(_get(cfg, "basis_size", 10))
    basis = build_basis(bc, grid, k)
    target = _build_target_density(grid, cfg, basis, w)
    try:
        orbitals = slater_from_density(target, bc)
    except ValueError as exc:
        raise ConfigError(f"target: {exc}") from exc
    report = classify_density(target, bc)
    save_json({
        "classification": report.to_dict(),
        "orbitals": [o.to_dict() for o in orbitals],
    }, out)
    csv_path = _get(cfg, "csv")
    if csv_path:
        header = ["x"]
        cols = [grid.nodes.tolist()]
        for j, orb in enumerate(orbitals):
            header += [f"orbital{j}_re", f"orbital{j}_im"]
            cols += [orb.values.real.tolist(), orb.values.imag.tolist()]
        write_csv(csv_path, header, zip(*cols))
    return 0


def cmd_verify(cfg: dict, out: str | None, scenario: str) -> int:
    try:
        result = run_scenario(scenario, seed=int(_get(cfg, "seed", 0)))
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    save_json(result, out)
    print(f"{result.name}: {'PASS' if result.passed else 'FAIL'}",
          file=sys.stderr)
    return 0 if result.passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermi1d",
        description="Few-fermion ground states, density-to-potential "
                    "inversion and exact Kohn-Sham DFT on the unit interval.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_config=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=needs_config,
                       help="path to the JSON run configuration")
        p.add_argument("--out", default=None,
                       help="path for the JSON result (default: stdout)")
        return p

    add("solve", "forward many-body ground state")
    add("invert", "recover the potential representing a target density")
    add("fll", "constrained-search functionals at a target density")
    add("ks-scf", "exact exchange-correlation self-consistent field")
    add("density-to-slater", "build determinant orbitals from a density")
    p_verify = add("verify", "run a verification scenario", needs_config=False)
    p_verify.add_argument("scenario", choices=scenario_names() + ["list"],
                          metavar="scenario",
                          help="one of: " + ", ".join(scenario_names()))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.command == "solve":
            return cmd_solve(cfg, args.out)
        if args.command == "invert":
            return cmd_invert(cfg, args.out)
        if args.command == "fll":
            return cmd_fll(cfg, args.out)
        if args.command == "ks-scf":
            return cmd_ks_scf(cfg, args.out)
        if args.command == "density-to-slater":
            return cmd_density_to_slater(cfg, args.out)
        if args.command == "verify":
            if args.scenario == "list":
                save_json({"scenarios": scenario_names()}, args.out)
                return 0
            return cmd_verify(cfg, args.out, args.scenario)
    except (ConfigError, TargetClassError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
