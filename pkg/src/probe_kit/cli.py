"""probe-kit command line: generate instances, run Monte Carlo policy
experiments against solved relaxations, and verify instance files.

Every flag can also be set through an environment variable with the
PROBE_KIT_ prefix (e.g. PROBE_KIT_RUN_TRIALS).  Exit codes: 0 ok, 1 usage
error, 2 verification failure, 3 capability exceeded.
"""

from __future__ import annotations

import csv
import io
import json
import sys

import click

from .errors import CapabilityError, VerificationError
from .harness import ExperimentConfig, run_experiment
from .instances import (
    ProbingInstance,
    gen_bipartite_matching,
    gen_posted_pricing,
    gen_random,
    verify_instance,
)
from .matroids import uniform_matroid
from .polytope import decompose, implied_vector
from .relaxation import relaxation_feasible, solve_relaxation
from .seeding import spawn_rng

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_CAPABILITY = 3


@click.group()
def cli():
    """Stochastic probing toolkit: relaxations, rounding policy, oracles."""


@cli.command("generate")
@click.option("--kind", type=click.Choice(["random", "bipartite", "posted-pricing"]), default="random", show_default=True)
@click.option("--size", type=int, default=6, show_default=True, help="ground-set size (random) / side size (bipartite) / agents (posted-pricing)")
@click.option("--k-in", type=int, default=1, show_default=True)
@click.option("--k-out", type=int, default=1, show_default=True)
@click.option("--objective", type=click.Choice(["linear", "coverage", "weighted_matroid_rank"]), default="linear", show_default=True)
@click.option("--edge-prob", type=float, default=0.6, show_default=True)
@click.option("--patience", type=int, default=2, show_default=True)
@click.option("--price-levels", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(writable=True), required=True)
def cmd_generate(kind, size, k_in, k_out, objective, edge_prob, patience, price_levels, seed, out):
    """Generate a probing instance file."""
    rng = spawn_rng(seed, "generate", kind)
    if kind == "random":
        inst = gen_random(size, k_in, k_out, objective, rng)
    elif kind == "bipartite":
        inst = gen_bipartite_matching(
            size, size, [patience] * size, [patience] * size, edge_prob, rng,
            objective_kind=objective if objective in ("linear", "coverage") else "linear",
        )
    else:
        pmfs = []
        for _ in range(size):
            raw = [rng.random() + 0.05 for _ in range(price_levels + 1)]
            total = sum(raw)
            pmf = [round(v / total, 6) for v in raw]
            pmf[-1] = 1.0 - sum(pmf[:-1])
            pmfs.append(pmf)
        inst = gen_posted_pricing(size, price_levels, uniform_matroid(size, max(1, size // 2)), pmfs, rng)
    inst.metadata["seed"] = seed
    inst.save(out)
    click.echo(f"wrote {out} (|E|={inst.n}, k_in={inst.k_in}, k_out={inst.k_out})")


@cli.command("run")
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["auto", "linear", "submodular"]), default="auto", show_default=True)
@click.option("--cg-steps", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(writable=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
def cmd_run(instance, trials, seed, mode, cg_steps, out, fmt, jobs):
    """Solve the relaxation and run Monte Carlo policy trials."""
    inst = ProbingInstance.load(instance)
    config = ExperimentConfig(trials=trials, seed=seed, mode=mode, cg_steps=cg_steps, jobs=jobs)
    report = run_experiment(inst, config)
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.CSV_FIELDS)
        writer.writerow(report.csv_row())
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@cli.command("verify")
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--cg-steps", type=int, default=50, show_default=True)
def cmd_verify(instance, cg_steps):
    """Run structural diagnostics on an instance file."""
    inst = ProbingInstance.load(instance)
    problems = verify_instance(inst)
    if not problems:
        relaxed = solve_relaxation(inst, cg_steps=cg_steps)
        if not relaxation_feasible(inst, relaxed.x0):
            problems.append("solved relaxation point violates a polytope constraint")
        else:
            for label, matroids, vec in (
                ("outer", inst.outer, list(relaxed.x0)),
                ("inner", inst.inner, [inst.p[i] * relaxed.x0[i] for i in range(inst.n)]),
            ):
                for j, m in enumerate(matroids):
                    d = decompose(m, vec)
                    rt = implied_vector(d)
                    if max(abs(rt[i] - vec[i]) for i in range(inst.n)) > 1e-9:
                        problems.append(f"{label} matroid {j}: decomposition round-trip failed")
    if problems:
        for p in problems:
            click.echo(f"FAIL: {p}", err=True)
        raise VerificationError(f"{len(problems)} verification failure(s)")
    click.echo("ok")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="probe-kit", standalone_mode=False,
                 auto_envvar_prefix="PROBE_KIT")
        return EXIT_OK
    except click.exceptions.Exit as exc:  # --help and friends
        return int(exc.exit_code)
    except (click.UsageError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except VerificationError as exc:
        click.echo(f"verification failed: {exc}", err=True)
        return EXIT_VERIFY
    except CapabilityError as exc:
        click.echo(f"capability exceeded: {exc}", err=True)
        return EXIT_CAPABILITY


if __name__ == "__main__":
    sys.exit(main())
