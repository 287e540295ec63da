"""Command-line front end.

Exit status: 0 ok, 2 bad input or violated precondition, 3 precision
exhausted, 4 budget cap reached, 5 an invariant failed (a bug signal).
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .cf import RealNumberSpec, expand_cf, parse_alpha
from .errors import DiolabError, PreconditionError
from .interval import as_fraction, fmt

HEADER = f"# diolab {__version__}"
GLOBAL_KEYS = ("output", "format", "seed", "threads")


class RationalType(click.ParamType):
    name = "p/q"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return as_fraction(str(value))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational (write p/q or a decimal)", param, ctx)


class AlphaType(click.ParamType):
    name = "alpha"

    def convert(self, value, param, ctx):
        if isinstance(value, RealNumberSpec):
            return value
        try:
            return parse_alpha(value)
        except (OSError, ValueError, KeyError) as e:
            self.fail(f"cannot read alpha {value!r}: {e}", param, ctx)


RATIONAL = RationalType()
ALPHA = AlphaType()


@dataclass
class Settings:
    output: Path | None
    fmt: str
    seed: int
    header: bool
    threads: int
    plots: bool

    @property
    def workers(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


def load_config(path: str, group: click.Group) -> tuple[dict, dict]:
    """key=value lines; "cmd.key" targets one subcommand, a bare key every command that has it."""
    flat: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.BadParameter(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            flat[k.replace("-", "_")] = v
    per_cmd: dict[str, dict] = {}
    for name, cmd in group.commands.items():
        params = {p.name for p in cmd.params}
        d = {k: v for k, v in flat.items() if "." not in k and k in params}
        d.update({k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith(name + ".")
                  and k.split(".", 1)[1] in params})
        per_cmd[name] = d
    glob = {k: v for k, v in flat.items() if k in GLOBAL_KEYS}
    return per_cmd, glob


class DiolabGroup(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except DiolabError as e:
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=DiolabGroup)
@click.version_option(__version__, prog_name="diolab")
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Report file (stdout when omitted). Figures and plot data go next to it.")
@click.option("--format", "fmt_", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for every sampled check.")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value file; flags given on the command line win.")
@click.option("--no-header", is_flag=True, help="Omit the version header for byte-stable output.")
@click.option("--threads", type=int, default=0, show_default=True, help="Worker processes (0 = all cores).")
@click.option("--plots/--no-plots", default=True, show_default=True, help="Render PNG figures beside --output.")
@click.pass_context
def main(ctx, output, fmt_, seed, config, no_header, threads, plots):
    """Exact experiments on badly approximable numbers, circle rotations and linear forms."""
    if config:
        per_cmd, glob = load_config(config, main)
        ctx.default_map = per_cmd
        src = ctx.get_parameter_source
        default = click.core.ParameterSource.DEFAULT
        if "output" in glob and src("output") == default:
            output = Path(glob["output"])
        if "format" in glob and src("fmt_") == default:
            fmt_ = glob["format"]
        if "seed" in glob and src("seed") == default:
            seed = int(glob["seed"])
        if "threads" in glob and src("threads") == default:
            threads = int(glob["threads"])
    if fmt_ not in ("json", "csv"):
        raise click.BadParameter(f"format must be json or csv, got {fmt_!r}")
    ctx.obj = Settings(output, fmt_, seed, not no_header, threads, plots)


# ---------------------------------------------------------------------------
# output


def _param_str(v) -> object:
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, RealNumberSpec):
        return v.label
    if isinstance(v, (list, tuple)):
        return [_param_str(t) for t in v]
    return v


def _csv_text(rows: list[dict], columns: list[str] | None) -> str:
    buf = io.StringIO()
    cols = columns or (list(rows[0]) if rows else [])
    if cols:
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def emit(ctx: click.Context, params: dict, result: dict, rows: list[dict], columns: list[str] | None = None,
         construction: str | None = None, plots=()) -> None:
    s: Settings = ctx.obj
    command = ctx.info_name
    params = {k: _param_str(v) for k, v in params.items()}
    params["seed"] = s.seed
    if s.fmt == "json":
        doc = {"command": command, "params": params}
        if construction:
            doc["construction"] = construction
        doc["result"] = result
        if s.header:
            doc = {"diolab": __version__, **doc}
        text = json.dumps(doc, indent=2, default=str) + "\n"
    else:
        text = ""
        if s.header:
            extra = f" construction={construction}" if construction else ""
            pstr = " ".join(f"{k}={v}" for k, v in params.items())
            text = f"{HEADER} {command} {pstr}{extra}\n"
        text += _csv_text(rows, columns)
    if s.output is None:
        click.echo(text, nl=False)
        return
    s.output.parent.mkdir(parents=True, exist_ok=True)
    s.output.write_text(text)
    if s.plots:
        from .plots import emit_plotdata, render

        for report, kind in plots:
            stem = s.output.with_suffix("")
            Path(f"{stem}_{kind}.csv").write_text(emit_plotdata(report, kind))
            render(report, kind, Path(f"{stem}_{kind}.png"), title=f"{command}: {kind}")


# ---------------------------------------------------------------------------
# subcommands


@main.command()
@click.option("--alpha", type=ALPHA, required=True, help="Fixture name, JSON object or JSON file.")
@click.option("--K", "K", type=click.IntRange(0), default=20, show_default=True)
@click.pass_context
def cf(ctx, alpha, K):
    """Partial quotients and convergents a_k, p_k, q_k for k = 0..K."""
    seq = expand_cf(alpha, K)
    seq.check()
    rows = [{"k": k, "a_k": seq.ak(k), "p_k": seq.pk(k), "q_k": seq.qk(k)} for k in range(seq.K + 1)]
    plots = []
    if not alpha.is_rational and K >= 2:
        from .singular import growth_stats

        plots.append((growth_stats(alpha, K), "growth"))
    emit(ctx, {"alpha": alpha, "K": K}, {"alpha": alpha.to_json(), "terminated": seq.terminated,
                                         "rows": rows}, rows, plots=plots)


@main.command()
@click.option("--alpha", type=ALPHA, required=True)
@click.option("--k", "k", type=click.IntRange(1), required=True, help="Partition level.")
@click.option("--limit", type=click.IntRange(0), default=1000, show_default=True, help="Intervals listed.")
@click.pass_context
def gaps(ctx, alpha, k, limit):
    """The level-k three-gap partition: type counts, lengths and one record per interval."""
    from .circle import build_partition

    P = build_partition(alpha, k)
    P.check_lengths()
    recs = list(P.to_records(limit))
    result = {"level": k, "q_k": P.qk, "q_km1": P.qkm1, "direction": P.direction,
              "type_counts": P.type_counts(), "short": list(P.short.as_strings()),
              "long": list(P.long.as_strings()), "intervals": recs}
    emit(ctx, {"alpha": alpha, "k": k, "limit": limit}, result, recs,
         columns=["level", "n", "partner", "type", "len_lo", "len_hi"])


@main.command()
@click.option("--alpha", type=ALPHA, required=True)
@click.option("--x", "x", type=RATIONAL, required=True, help="Target point p/q.")
@click.option("--qlo", type=click.IntRange(1), default=1, show_default=True)
@click.option("--qhi", type=click.IntRange(1), required=True)
@click.option("--mode", type=click.Choice(["two_sided", "positive"]), default="two_sided", show_default=True)
@click.option("--threshold", type=RATIONAL, default=None, help="Report every q with q||q alpha - x|| below this.")
@click.pass_context
def scan(ctx, alpha, x, qlo, qhi, mode, threshold):
    """Exact minimum of q ||q alpha - x|| over qlo <= q <= qhi."""
    from .inhomog import liminf_scan

    if qhi < qlo:
        raise PreconditionError("qhi must be >= qlo")
    res = liminf_scan(alpha, x, qlo, qhi, mode=mode, threshold=threshold)
    doc = res.to_json()
    emit(ctx, {"alpha": alpha, "x": x, "qlo": qlo, "qhi": qhi, "mode": mode, "threshold": threshold},
         doc, doc["below_threshold"], columns=["q", "lo", "hi"])


def _refute_one(args):
    from .inhomog import emptiness_descent

    alpha, eps, x, ds = args
    tr = emptiness_descent(alpha, eps, x, ds)
    return {"x": fmt(x), "outcome": tr.outcome, "witness": tr.witness, "K": tr.K,
            "segments": tr.segments, "steps": len(tr.steps), "max_segment_steps": tr.max_segment_steps,
            "step_bound": tr.step_bound, "witness_beyond_K": tr.witness_beyond_K}


@main.command()
@click.option("--alpha", type=ALPHA, required=True)
@click.option("--eps", type=RATIONAL, required=True)
@click.option("--action", type=click.Choice(["build", "refute"]), default="build", show_default=True)
@click.option("--K", "K", type=click.IntRange(1), default=40, show_default=True, help="First level of the chain.")
@click.option("--depth", type=click.IntRange(1), default=5, show_default=True)
@click.option("--delta-small", type=RATIONAL, default=Fraction(1, 100), show_default=True)
@click.option("--samples", type=click.IntRange(1), default=20, show_default=True,
              help="Random targets for the refutation run.")
@click.pass_context
def onesided(ctx, alpha, eps, action, K, depth, delta_small, samples):
    """Build a one-sided target chain (eps < 1/4) or refute random targets (eps > 1/4)."""
    from .inhomog import check_onesided_lemmas, one_sided_build

    s: Settings = ctx.obj
    params = {"alpha": alpha, "eps": eps, "action": action, "K": K, "depth": depth}
    if action == "build":
        ots = one_sided_build(alpha, eps, K, depth)
        rows = []
        for g in ots.generations[:-1]:
            rep = check_onesided_lemmas(ots, g.k)
            lo = min([m.lo for m in rep.margins_a] + [m.lo for _, m in rep.margins_b_inside]
                     + [rep.margin_b_outside.lo, rep.containment_margin.lo])
            rows.append({"k": g.k, "n": g.n, "b": g.b, "eps_k": float(rep.eps_k),
                         "min_margin": float(lo), "ok": rep.ok, "failures": "; ".join(f"{f[0]}:{f[1]}" for f in rep.failures)})
        doc = ots.to_json()
        doc["lemmas"] = rows
        emit(ctx, params, doc, rows, construction=f"onesided:eps={fmt(eps)},K={K}")
        return
    params.update(delta_small=delta_small, samples=samples)
    rng = random.Random(s.seed)
    xs = [Fraction(rng.randrange(1, 2 ** 40), 2 ** 40) for _ in range(samples)]
    jobs = [(alpha, eps, x, delta_small) for x in xs]
    if s.workers > 1 and samples > 1:
        with ProcessPoolExecutor(max_workers=min(s.workers, samples)) as ex:
            rows = list(ex.map(_refute_one, jobs))
    else:
        rows = [_refute_one(j) for j in jobs]
    survivors = sum(r["outcome"] != "witness" or not r["witness_beyond_K"] for r in rows)
    emit(ctx, params, {"survivors": survivors, "runs": rows}, rows)


@main.command()
@click.option("--alpha", type=ALPHA, required=True)
@click.option("--what", type=click.Choice(["et", "survivor", "box"]), default="et", show_default=True)
@click.option("--delta", type=RATIONAL, default=Fraction(1, 3), show_default=True)
@click.option("--M", "M", type=RATIONAL, default=Fraction(72), show_default=True)
@click.option("--depth", type=click.IntRange(1), default=5, show_default=True)
@click.option("--eps", type=RATIONAL, default=Fraction(1, 10), show_default=True)
@click.option("--K", "K", type=click.IntRange(1), default=2, show_default=True)
@click.pass_context
def dims(ctx, alpha, what, delta, M, depth, eps, K):
    """Dimension bounds: Erdos-Taylor covers, survivor covers, or a box-counting estimate."""
    from . import fractal

    if what == "survivor":
        sc = fractal.survivor_cover(alpha, eps, K, depth)
        rows = sc.rows()
        doc = {"ks": sc.ks, "C_eps": sc.C_eps, "M": sc.M, "upper_bound": sc.upper_bound, "rows": rows,
               "parent_ratio_max": [float(r) for r in sc.parent_ratio_max]}
        emit(ctx, {"alpha": alpha, "what": what, "eps": eps, "K": K, "depth": depth}, doc, rows,
             construction=f"survivor:eps={fmt(eps)},K={K}", plots=[(sc, "survivors")])
        return
    out = fractal.bad_cover_pipeline(alpha, delta, M, depth)
    covers = out["covers"]
    fractal.verify_cover(covers, sample=2000)
    rows = fractal.cover_stats_rows(covers)
    trend = fractal.mass_dist_trend(covers)
    for r, v in zip(rows[2:], trend):
        r["bound"] = v
    doc = {"phi": out["phi"], "n_seq": [str(n) for n in out["n_seq"]], "constant": fmt(out["constant"]),
           "mass_dist_trend": trend, "rows": rows}
    params = {"alpha": alpha, "what": what, "delta": delta, "M": M, "depth": depth}
    if what == "box":
        last = covers[-1]
        top = max(1, last.n.bit_length() - 1)
        scales = list(range(max(1, top - 6), top + 1))
        est = fractal.box_dimension_estimate(last, scales)
        doc["box"] = {"slope": est.slope, "scales": est.scales, "counts": est.counts}
    emit(ctx, params, doc, rows, columns=["gen", "count", "m", "gap_num", "gap_den", "lenmax_num",
                                          "lenmax_den", "bound"],
         construction=out["construction"], plots=[(covers, "dimension")])


@main.command()
@click.option("--alpha", type=ALPHA, required=True)
@click.option("--c", "c", type=RATIONAL, default=Fraction(1, 4), show_default=True)
@click.option("--N", "N", type=click.IntRange(1), required=True)
@click.option("--growth-K", "growth_K", type=click.IntRange(2), default=40, show_default=True)
@click.option("--eta", type=RATIONAL, multiple=True, help="Heaviness sweep values (repeatable).")
@click.option("--heavy-delta", type=RATIONAL, default=Fraction(1, 10), show_default=True)
@click.pass_context
def singular(ctx, alpha, c, N, growth_K, eta, heavy_delta):
    """Dirichlet solvability at X = 2^l for l = 1..N, with per-block structure and growth of q_k."""
    from .singular import check_block_structure, growth_stats, heaviness_sweep, singular_average_density

    rep = singular_average_density(alpha, c, N)
    check_block_structure(rep)
    gs = growth_stats(alpha, growth_K)
    doc = rep.to_json()
    doc["growth"] = gs.rows()
    if eta:
        doc["heaviness"] = heaviness_sweep(alpha, heavy_delta, eta, growth_K)
    params = {"alpha": alpha, "c": c, "N": N, "growth_K": growth_K}
    emit(ctx, params, doc, rep.rows(), columns=["ell", "solvable", "block_k"],
         plots=[(rep, "density"), (gs, "growth")])


def _read_matrix(text: str):
    from .matrix import MatrixSpec

    if text.lstrip().startswith("{"):
        return MatrixSpec.from_json(json.loads(text))
    p = Path(text)
    if p.exists():
        return MatrixSpec.from_json(json.loads(p.read_text()))
    # comma-separated fixture names give an n x 1 column
    return MatrixSpec.column(*(parse_alpha(t.strip()) for t in text.split(",")))


@main.command()
@click.option("--matrix", "matrix_", required=True,
              help="JSON file or object with n, m and entries; or fixture names a,b,... for a column.")
@click.option("--ymax", type=click.IntRange(1), default=100, show_default=True)
@click.option("--delta", type=RATIONAL, default=None, help="Also build grid sets for each y_i.")
@click.pass_context
def matrix(ctx, matrix_, ymax, delta):
    """Best approximation vectors y_i with Y_i = |y_i| <= ymax and their M(y_i)."""
    from .matrix import best_approx_sequence, grid_set

    try:
        A = _read_matrix(matrix_)
    except (OSError, ValueError, KeyError) as e:
        raise PreconditionError(f"cannot read matrix: {e}") from e
    seq = best_approx_sequence(A, ymax)
    doc = seq.to_json()
    params = {"matrix": matrix_, "ymax": ymax, "delta": delta}
    if delta is not None:
        grids = []
        for it in seq.items:
            if it.Y ** A.n > 4096:
                break
            g = grid_set(it.y, delta, seed=ctx.obj.seed, sample=200)
            grids.append({"y": list(it.y), "H": g.H, "count": len(g.centers), "radius_sq": fmt(g.radius_sq)})
        doc["grids"] = grids
    cols = ["i", "Y"] + [f"y{t}" for t in range(1, A.n + 1)] + ["M_lo", "M_hi"]
    emit(ctx, params, doc, seq.rows(), columns=cols)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
