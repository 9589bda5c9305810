"""Command-line entry point.

Four run modes over a JSON scenario config:

* ``evolve``   -- time-evolve the configured scenario; writes a trajectory
                  CSV (time, per-state populations, p_stable, purity).
* ``sweep``    -- run the configured parameter grid or phonon series;
                  writes one heat-map CSV per panel (or a series CSV).
* ``steady``   -- asymptotic state via the generator oracle; single CSV row.
* ``validate`` -- run the built-in invariant suite; nonzero exit on failure.

Every output file pairs with a JSON metadata sidecar sufficient to re-run
it bit-identically.  Exit codes: 0 success, 1 config/validation error,
2 numerical failure.

``--config`` accepts a path or the name of a bundled scenario
(fig4, fig5a, fig5b, fig6, fig6b, fig7, fig7b, fig8, fig9, fig9b).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .model import ModelParams, params_from_dict, params_to_dict, simulate
from .observables import purity as purity_of
from .observables import stable_bond_probability
from .sweep import (
    SweepSpec,
    heatmap_csv,
    run_phonon_series,
    run_sweep,
    series_csv,
    spec_to_dict,
    write_heatmap,
)

BUNDLED = ("fig4", "fig5a", "fig5b", "fig6", "fig6b", "fig7", "fig7b", "fig8", "fig9", "fig9b")


def load_config(source: str) -> dict:
    """Load a scenario config from a file path or a bundled scenario name."""
    path = Path(source)
    if path.exists():
        text = path.read_text()
    elif source in BUNDLED:
        text = resources.files("hbondsim.scenarios").joinpath(f"{source}.json").read_text()
    else:
        raise ValueError(
            f"config {source!r} is neither an existing file nor a bundled scenario "
            f"(bundled: {', '.join(BUNDLED)})"
        )
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {source!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"config {source!r} must be a JSON object")
    if "model" not in data:
        raise ValueError("config is missing required key 'model'")
    return data


def _apply_overrides(params: ModelParams, args) -> ModelParams:
    if args.basis:
        params = dataclasses.replace(params, basis_mode=args.basis)
    if args.scheme:
        scheme = {"euler": "euler_split", "rk4": "rk4"}[args.scheme]
        params = dataclasses.replace(
            params, integrator=dataclasses.replace(params.integrator, scheme=scheme)
        )
    return params


def trajectory_csv(traj) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time_s", *traj.basis.labels(), "p_stable", "purity"])
    for i, t in enumerate(traj.times):
        row = [repr(float(t))]
        row += [repr(float(v)) for v in traj.populations[i]]
        row += [repr(float(traj.p_stable[i])), repr(float(traj.purity[i]))]
        writer.writerow(row)
    return buf.getvalue()


def _write_with_sidecar(path: Path, text: str, meta: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_evolve(config: dict, params: ModelParams, out_dir: Path, prefix: str) -> list[Path]:
    traj = simulate(params)
    path = out_dir / f"{prefix}_trajectory.csv"
    meta = {
        "kind": "trajectory",
        "model": params_to_dict(params),
        "steady_time_s": traj.steady_time_s,
        "n_steps": traj.n_steps,
        "version": __version__,
    }
    _write_with_sidecar(path, trajectory_csv(traj), meta)
    return [path]


def cmd_sweep(config: dict, params: ModelParams, out_dir: Path, prefix: str,
              parallelism: int) -> list[Path]:
    written: list[Path] = []
    if "phonon_series" in config:
        section = config["phonon_series"]
        n_values = section.get("n_values")
        if not n_values:
            raise ValueError("config key 'phonon_series.n_values' is missing or empty")
        records = run_phonon_series(params, n_values, method=section.get("method", "evolve"))
        path = out_dir / f"{prefix}_series.csv"
        meta = {
            "kind": "series",
            "model": params_to_dict(params),
            "n_values": [int(n) for n in n_values],
            "method": section.get("method", "evolve"),
            "version": __version__,
        }
        _write_with_sidecar(path, series_csv(records), meta)
        return [path]

    if "sweep" not in config:
        raise ValueError("config is missing required key 'sweep' (or 'phonon_series')")
    section = dict(config["sweep"])
    try:
        spec = SweepSpec(
            x_param=section.pop("x_param"),
            x_values=section.pop("x_values"),
            y_param=section.pop("y_param"),
            y_values=section.pop("y_values"),
            fixed=params,
            **section,
        )
    except KeyError as exc:
        raise ValueError(f"config key 'sweep.{exc.args[0]}' is missing") from exc
    except TypeError as exc:
        raise ValueError(f"invalid 'sweep' section: {exc}") from exc

    for panel_value, grid_spec in spec.expand_panels():
        heatmap = run_sweep(grid_spec, parallelism=parallelism)
        if panel_value is None:
            path = out_dir / f"{prefix}_heatmap.csv"
        else:
            tag = repr(float(panel_value)).replace(".", "p").replace("-", "m")
            path = out_dir / f"{prefix}_{spec.panel_param}_{tag}.csv"
        heatmap = dataclasses.replace(heatmap, panel_value=panel_value)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_heatmap(heatmap, path, metadata={
            "panel_param": spec.panel_param,
            "version": __version__,
        })
        written.append(path)
    return written


def cmd_steady(config: dict, params: ModelParams, out_dir: Path, prefix: str) -> list[Path]:
    from .model import steady_oracle
    from .observables import populations

    rho = steady_oracle(params)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*rho.basis.labels(), "p_stable"])
    writer.writerow([repr(float(v)) for v in populations(rho)]
                    + [repr(stable_bond_probability(rho))])
    path = out_dir / f"{prefix}_steady.csv"
    meta = {"kind": "steady", "model": params_to_dict(params), "version": __version__}
    _write_with_sidecar(path, buf.getvalue(), meta)
    return [path]


def cmd_validate() -> int:
    """Run the invariant suite, printing one PASS/FAIL line per group."""
    failures = 0
    for name, check in _validation_groups():
        try:
            check()
            print(f"PASS {name}")
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
    return 1 if failures else 0


def _validation_groups():
    from .constants import REFERENCE_GAMMA_EV, characteristic_time_s
    from .hilbert import build_basis
    from .integrate import IntegratorConfig, project_physical
    from .lindblad import (
        Channel,
        DensityMatrix,
        dissipator,
        generator_matrix,
        qme_rhs,
        steady_state,
    )
    from .model import build, reference_params
    from .operators import OperatorMatrix

    def check_basis():
        basis = build_basis("restricted", 1)
        expected = [(2, 1, 0), (1, 1, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0), (-1, 0, 1), (-1, 0, 0)]
        assert [tuple(s) for s in basis.states] == expected, "seven-state listing mismatch"
        for n in (1, 2, 5, 10):
            assert build_basis("restricted", n).dim == 5 * n + 2
            assert build_basis("full", n).dim == 8 * (n + 1)
        for i, s in enumerate(basis.states):
            assert basis.state_index(s) == i

    def check_hamiltonian():
        basis, ham, _, _ = build(reference_params())
        assert ham.is_hermitian(), "Hamiltonian not Hermitian"
        for i, s in enumerate(basis.states):
            if s.d == -1:
                row = np.abs(ham.mat[i]).sum() - abs(ham.mat[i, i])
                assert row < 1e-15, "stable states must be coherence-free"

    def check_config_guards():
        basis, ham, channels, _ = build(reference_params())
        try:
            Channel("phn", channels[2].A, REFERENCE_GAMMA_EV, mu=1.2)
            raise AssertionError("mu >= 1 was not rejected")
        except ValueError:
            pass
        tau = characteristic_time_s()
        try:
            IntegratorConfig(dt=tau, tau=tau)
            raise AssertionError("dt = tau was not rejected")
        except ValueError:
            pass

    def check_dissipator():
        basis, ham, channels, rho0 = build(reference_params())
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
            rho = x @ x.conj().T
            rho /= np.trace(rho).real
            for ch in channels:
                assert abs(np.trace(dissipator(rho, ch))) <= 1e-12
            rhs = qme_rhs(rho, ham, channels)
            assert np.max(np.abs(rhs - rhs.conj().T)) <= 1e-12 * np.max(np.abs(rhs))

    def check_generator():
        basis, ham, channels, rho0 = build(reference_params())
        G = generator_matrix(ham, channels)
        rng = np.random.default_rng(12)
        x = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
        rho = x @ x.conj().T
        rho /= np.trace(rho).real
        lhs = (G @ rho.reshape(-1)).reshape(basis.dim, basis.dim)
        rhs = qme_rhs(rho, ham, channels)
        scale = np.max(np.abs(G))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale
        eigs = np.linalg.eigvals(G)
        assert eigs.real.max() <= 1e-10 * np.max(np.abs(eigs))

    def check_projection():
        raw = np.diag([1.1, -0.1]).astype(complex)
        once = project_physical(raw)
        assert np.allclose(once, np.diag([1.0, 0.0])), "clip-and-renormalize failed"
        twice = project_physical(once)
        assert np.max(np.abs(twice - once)) < 1e-14, "projection not idempotent"

    def check_steady_oracle():
        params = reference_params()
        _, ham, channels, rho0 = build(params)
        rho_ss = steady_state(ham, channels, rho0=rho0)
        rho_ss.validate()

    return [
        ("hilbert basis", check_basis),
        ("hamiltonian structure", check_hamiltonian),
        ("config guards", check_config_guards),
        ("dissipator trace", check_dissipator),
        ("generator consistency", check_generator),
        ("physical projection", check_projection),
        ("steady-state oracle", check_steady_oracle),
    ]


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbondsim",
        description="Hydrogen-bond open-quantum-system simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("evolve", "time-evolve a scenario and write the trajectory CSV"),
        ("sweep", "run a parameter grid or phonon series"),
        ("steady", "steady state via the generator oracle"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True,
                       help="scenario JSON path or bundled name (e.g. fig5a)")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("--basis", choices=["restricted", "full"], default=None)
        p.add_argument("--scheme", choices=["euler", "rk4"], default=None)
    sub.add_parser("validate", help="run the invariant suite")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate()

    try:
        config = load_config(args.config)
        params = params_from_dict(config["model"])
        params = _apply_overrides(params, args)
        out_dir = Path(args.out)
        prefix = config.get("output_prefix") or Path(args.config).stem
        if args.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {args.parallelism}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "evolve":
            written = cmd_evolve(config, params, out_dir, prefix)
        elif args.command == "sweep":
            written = cmd_sweep(config, params, out_dir, prefix, args.parallelism)
        else:
            written = cmd_steady(config, params, out_dir, prefix)
    except ValueError as exc:
        # Config-shaped problems discovered while running (e.g. missing
        # sweep section) are validation errors; numerical blowups are not.
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    for path in written:
        print(path)
    return 0


def entrypoint() -> None:
    raise SystemExit(main())
