"""Reproducible experiment runner.

Every pipeline of the package is exposed as a subcommand writing JSON/CSV
files that embed the fully resolved configuration and a format version, so
a run is reproducible from its own output.  One master seed drives all
randomness (streams are split with numpy's SeedSequence).

Exit codes: 0 success, 1 numerical failure (including a failed PIZ
verification), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .chain import chain_vs_heat, dirichlet_ratio
from .errors import NumericalError
from .gibbs import (DiscretizedDistribution, ModelSpec, observable_distribution)
from .gmc import (Domain, LatticeDomain, bin_distribution, dgff_sample,
                  mc_moment, moment_growth_fit, sample_gmc_field,
                  sample_m_statistics, save_field_snapshot, tail_prediction)
from .graphs import graph_from_json
from .lyclass import TailProfile, classify
from .zeros import (EntireMGF, Rectangle, VERDICT_PIZ, locate_zeros,
                    refinement_stable_report, zero_report_from_json)

FORMAT_VERSION = 1


def _default_threads() -> int:
    env = os.environ.get("LEEYANG_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _report(config: dict, results: dict) -> str:
    return json.dumps({
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "config": config,
        "results": results,
    }, sort_keys=True, indent=1)


def _write(out_dir: str, name: str, text: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    target.write_text(text)
    return target


def _csv_with_config(config: dict, body: str) -> str:
    return "# config: " + json.dumps(config, sort_keys=True) + "\n" + body


def _load_dist(path: str) -> DiscretizedDistribution:
    text = Path(path).read_text()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return DiscretizedDistribution.from_json(text)
    return DiscretizedDistribution.from_csv(text)


def _region_from(args) -> Rectangle:
    return Rectangle(*args.region)


def _apply_config(args, argv) -> None:
    """Fill parameters from the --config JSON for flags absent on the line.

    Keys use either dash or underscore form; an explicit command-line flag
    always wins over the file.
    """
    if not getattr(args, "config", None):
        return
    cfg = json.loads(Path(args.config).read_text())
    given = set(argv)
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        flag = "--" + key.replace("_", "-")
        if hasattr(args, attr) and flag not in given:
            setattr(args, attr, val)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_spin_dist(args) -> int:
    graph = graph_from_json(Path(args.graph).read_text())
    model = ModelSpec(kind=args.model, graph=graph, inverse_temperature=args.beta)
    dist = observable_distribution(model, args.grid_n)
    config = {"subcommand": "spin-dist", "graph": args.graph, "model": args.model,
              "beta": args.beta, "grid_n": args.grid_n, "out": args.out}
    _write(args.out, "spin_dist.csv", _csv_with_config(config, dist.to_csv()))
    _write(args.out, "spin_dist.json", _report(config, {
        "n_atoms": len(dist.xs), "variance": dist.variance,
        "support_radius": dist.support_radius, "symmetrized": dist.symmetrized}))
    print(f"spin-dist: {len(dist.xs)} atoms, variance {dist.variance:.6g}")
    return 0


def _cmd_zeros(args) -> int:
    dist = _load_dist(args.dist)
    report = locate_zeros(EntireMGF(dist), _region_from(args), args.tol)
    config = {"subcommand": "zeros", "dist": args.dist, "region": list(args.region),
              "tol": args.tol, "out": args.out}
    _write(args.out, "zero_report.json", _report(config, json.loads(report.to_json())))
    _write(args.out, "zeros.csv", _csv_with_config(config, report.zeros_csv()))
    print(f"zeros: {report.total_count} zero(s), verdict {report.piz_verdict}")
    return 0


def _cmd_classify(args) -> int:
    source = _load_dist(args.dist) if args.dist else None
    profile = None
    if args.tail_a is not None:
        profile = TailProfile(exponent_a=args.tail_a, coefficient=args.tail_b or float("nan"),
                              fit_window=None, fit_residual=args.tail_residual,
                              method="from_tail_probabilities")
    zr = zero_report_from_json(Path(args.zeros).read_text()) if args.zeros else None
    if source is None and profile is None:
        raise ValueError("classify needs --dist or --tail-a")
    verdict = classify(source, profile=profile, zero_report=zr)
    config = {"subcommand": "classify", "dist": args.dist, "tail_a": args.tail_a,
              "tail_b": args.tail_b, "tail_residual": args.tail_residual,
              "zeros": args.zeros, "out": args.out}
    _write(args.out, "class_verdict.json", _report(config, json.loads(verdict.to_json())))
    print(f"classify: {verdict.verdict}")
    return 0


def _cmd_chain_limit(args) -> int:
    ns = [int(s) for s in args.n_list.split(",")]
    config = {"subcommand": "chain-limit", "b": args.b, "n_list": ns,
              "grid_n": args.grid_n, "pair": list(args.pair),
              "pair_ref": list(args.pair_ref), "threads": args.threads,
              "out": args.out}

    def one(n: int) -> dict:
        row = chain_vs_heat(n, args.b, args.grid_n)
        rat = dirichlet_ratio(n, args.b, tuple(args.pair), tuple(args.pair_ref),
                              args.grid_n)
        row["ratio"] = rat["ratio"]
        row["limit_ratio"] = rat["limit_ratio"]
        return row

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        rows = list(pool.map(one, ns))
    body = "n,b,sup_distance,l1_distance,ratio,limit_ratio\n" + "".join(
        f"{r['n']},{r['b']!r},{r['sup_distance']!r},{r['l1_distance']!r},"
        f"{r['ratio']!r},{r['limit_ratio']!r}\n" for r in rows)
    _write(args.out, "chain_limit.csv", _csv_with_config(config, body))
    _write(args.out, "chain_limit.json", _report(config, {"rows": rows}))
    for r in rows:
        print(f"chain-limit: n={r['n']} sup={r['sup_distance']:.3e} "
              f"l1={r['l1_distance']:.3e} ratio_gap={abs(r['ratio'] - r['limit_ratio']):.2e}")
    return 0


def _cmd_dirichlet_ratio(args) -> int:
    res = dirichlet_ratio(args.n, args.b, tuple(args.pair), tuple(args.pair_ref), args.grid_n)
    config = {"subcommand": "dirichlet-ratio", "b": args.b, "n": args.n,
              "pair": list(args.pair), "pair_ref": list(args.pair_ref),
              "grid_n": args.grid_n, "out": args.out}
    _write(args.out, "dirichlet_ratio.json", _report(config, res))
    print(f"dirichlet-ratio: ratio {res['ratio']:.6g}, limit {res['limit_ratio']:.6g}, "
          f"gap {res['gap']:.3e}")
    return 0


def _cmd_gmc_moments(args) -> int:
    domain = Domain(args.domain, args.radius)
    ks = list(range(1, args.k_max + 1))
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(args.seed).spawn(len(ks))]
    config = {"subcommand": "gmc-moments", "beta_sq": args.beta_sq, "k_max": args.k_max,
              "samples": args.samples, "seed": args.seed, "domain": args.domain,
              "radius": args.radius, "threads": args.threads, "out": args.out}
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        ests = list(pool.map(lambda kz: mc_moment(domain, args.beta_sq, kz[0],
                                                  args.samples, kz[1]), zip(ks, seeds)))
    fit = moment_growth_fit(ests) if len(ests) >= 4 else None
    pred = tail_prediction(args.beta_sq)
    body = "k,estimate,stderr,samples,low_confidence\n" + "".join(
        f"{e.k},{e.estimate!r},{e.stderr!r},{e.samples},{int(e.low_confidence)}\n" for e in ests)
    _write(args.out, "gmc_moments.csv", _csv_with_config(config, body))
    results = {"moments": [e.as_dict() for e in ests],
               "tail_exponent": pred.exponent, "slowtail_flagged": pred.slowtail_flagged}
    if fit:
        results["growth_fit"] = {"beta_sq_hat": fit.beta_sq_hat, "c_hat": fit.c_hat,
                                 "residual": fit.residual, "slope_stderr": fit.slope_stderr,
                                 "ci": list(fit.ci)}
    _write(args.out, "gmc_moments.json", _report(config, results))
    for e in ests:
        print(f"gmc-moments: k={e.k} estimate={e.estimate:.6g} +- {e.stderr:.2g}")
    if fit:
        print(f"gmc-moments: growth slope {fit.beta_sq_hat:.4f} "
              f"(target beta^2 = {args.beta_sq}), CI {fit.ci}")
    return 0


def _cmd_dgff_check(args) -> int:
    domain = LatticeDomain.square(args.side)
    fields = dgff_sample(domain, args.seed, size=args.samples)
    emp = (fields.T @ fields) / args.samples
    G = domain.green_matrix()
    rel = float(np.linalg.norm(emp - G) / np.linalg.norm(G))
    config = {"subcommand": "dgff-check", "side": args.side, "samples": args.samples,
              "seed": args.seed, "out": args.out}
    _write(args.out, "dgff_check.json", _report(config, {
        "frobenius_relative_error": rel, "interior_sites": domain.n_interior}))
    print(f"dgff-check: Frobenius relative error {rel:.4f} on {domain.n_interior} sites")
    return 0


def _cmd_m_stat(args) -> int:
    domain = LatticeDomain.disk(args.n * args.r)
    samples = sample_m_statistics(domain, args.n, args.beta, args.samples, args.seed)
    dist = bin_distribution(samples, B=args.bins)
    f = EntireMGF(dist)
    region = _region_from(args)
    report = locate_zeros(f, region, args.tol)

    # bootstrap error bars on each located zero (Newton from the baseline)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(1)[0])
    boot_lists: list[list[complex]] = [[] for _ in report.zeros]
    for _ in range(args.bootstrap):
        res = rng.choice(samples, size=len(samples), replace=True)
        fb = EntireMGF(bin_distribution(res, B=args.bins))
        ev = fb.evaluator(max(abs(region.re_min), abs(region.re_max), abs(region.im_max)) * 1.5)
        for i, z in enumerate(report.zeros):
            zz = z.location
            for _ in range(30):
                fv, dv, _ = ev.eval_pair_batch(np.array([zz]))
                if dv[0] == 0:
                    break
                step = fv[0] / dv[0]
                zz = zz - step
                if abs(step) < 1e-12:
                    break
            boot_lists[i].append(zz)
    zero_rows = []
    for z, boots in zip(report.zeros, boot_lists):
        bs = np.asarray(boots) if boots else np.array([z.location])
        zero_rows.append({"re": z.location.real, "im": z.location.imag,
                          "residual": z.residual,
                          "bootstrap_se_re": float(np.std(bs.real, ddof=1)) if len(bs) > 1 else 0.0,
                          "bootstrap_se_im": float(np.std(bs.imag, ddof=1)) if len(bs) > 1 else 0.0})

    config = {"subcommand": "m-stat", "n": args.n, "r": args.r, "beta": args.beta,
              "samples": args.samples, "seed": args.seed, "bins": args.bins,
              "bootstrap": args.bootstrap, "region": list(args.region),
              "tol": args.tol, "out": args.out}
    results = {"mean": float(np.mean(samples)), "std": float(np.std(samples, ddof=1)),
               "second_moment": float(np.mean(samples**2)),
               "exploratory": True,
               "verdict": report.piz_verdict,
               "zeros": zero_rows}
    _write(args.out, "m_stat.json", _report(config, results))
    if args.dump_field:
        fld = sample_gmc_field(domain, args.beta, args.seed)
        save_field_snapshot(Path(args.out) / args.dump_field, fld, args.n, args.r)
    print(f"m-stat: {args.samples} samples, mean {results['mean']:.3e}, "
          f"verdict {report.piz_verdict} (exploratory)")
    return 0


def _cmd_villain_verify(args) -> int:
    graph = graph_from_json(Path(args.graph).read_text())
    model = ModelSpec(kind="villain", graph=graph)

    def factory(N: int) -> DiscretizedDistribution:
        return observable_distribution(model, N)

    region = _region_from(args)
    report, disp = refinement_stable_report(factory, args.grid_n, region, args.tol)
    config = {"subcommand": "villain-verify", "graph": args.graph, "grid_n": args.grid_n,
              "region": list(args.region), "tol": args.tol, "out": args.out}
    results = json.loads(report.to_json())
    results["max_grid_displacement"] = disp
    _write(args.out, "zero_report.json", _report(config, results))
    ok = report.piz_verdict == VERDICT_PIZ
    print(f"villain-verify: {report.total_count} zero(s), max |Re z| = "
          f"{report.max_abs_re:.3e}, verdict {report.piz_verdict}")
    if not ok:
        raise NumericalError(f"PIZ verification failed: verdict {report.piz_verdict}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leeyang",
                                description="spin-model and chaos-measure zero laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, seed_required=False):
        sp.add_argument("--config", help="JSON file with parameter defaults")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--threads", type=int, default=_default_threads())
        if seed_required:
            sp.add_argument("--seed", type=int, required=True, help="master RNG seed")

    sp = sub.add_parser("spin-dist", help="exact law of the weighted cosine sum")
    common(sp)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--model", choices=["xy", "villain"], default="villain")
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--grid-n", type=int, default=128)
    sp.set_defaults(func=_cmd_spin_dist)

    sp = sub.add_parser("zeros", help="locate MGF zeros of a stored distribution")
    common(sp)
    sp.add_argument("--dist", required=True)
    sp.add_argument("--region", type=float, nargs=4, default=[-8.0, 8.0, 0.0, 8.0],
                    metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=_cmd_zeros)

    sp = sub.add_parser("classify", help="class verdict from distribution/tail/zero evidence")
    common(sp)
    sp.add_argument("--dist")
    sp.add_argument("--tail-a", type=float)
    sp.add_argument("--tail-b", type=float)
    sp.add_argument("--tail-residual", type=float, default=0.0)
    sp.add_argument("--zeros")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("chain-limit", help="n-step chain kernel vs heat kernel distances")
    common(sp)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--n-list", default="16,32,64,128,256")
    sp.add_argument("--grid-n", type=int, default=512)
    sp.add_argument("--pair", type=float, nargs=2, default=[0.0, float(np.pi / 2)],
                    help="pinned angles for the ratio columns")
    sp.add_argument("--pair-ref", type=float, nargs=2, default=[0.0, 0.0])
    sp.set_defaults(func=_cmd_chain_limit)

    sp = sub.add_parser("dirichlet-ratio", help="pinned-end partition-function ratio")
    common(sp)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=128)
    sp.add_argument("--pair", type=float, nargs=2, default=[0.0, float(np.pi / 2)])
    sp.add_argument("--pair-ref", type=float, nargs=2, default=[0.0, 0.0])
    sp.add_argument("--grid-n", type=int, default=512)
    sp.set_defaults(func=_cmd_dirichlet_ratio)

    sp = sub.add_parser("gmc-moments", help="Coulomb-gas moment estimates and growth fit")
    common(sp, seed_required=True)
    sp.add_argument("--beta-sq", type=float, required=True)
    sp.add_argument("--k-max", type=int, default=5)
    sp.add_argument("--samples", type=int, default=10**5)
    sp.add_argument("--domain", choices=["disk", "square"], default="disk")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.set_defaults(func=_cmd_gmc_moments)

    sp = sub.add_parser("dgff-check", help="empirical DGFF covariance vs Green's matrix")
    common(sp, seed_required=True)
    sp.add_argument("--side", type=int, default=11)
    sp.add_argument("--samples", type=int, default=10**5)
    sp.set_defaults(func=_cmd_dgff_check)

    sp = sub.add_parser("m-stat", help="sample the renormalised chaos sum; exploratory zeros")
    common(sp, seed_required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--r", type=float, default=1.5)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--samples", type=int, default=20000)
    sp.add_argument("--bins", type=int, default=200)
    sp.add_argument("--bootstrap", type=int, default=200)
    sp.add_argument("--region", type=float, nargs=4, default=[-8.0, 8.0, 0.0, 8.0])
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--dump-field", help="also write a field snapshot to this file")
    sp.set_defaults(func=_cmd_m_stat)

    sp = sub.add_parser("villain-verify",
                        help="end to end: build Villain model, locate zeros, assert PIZ")
    common(sp)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--grid-n", type=int, default=128)
    sp.add_argument("--region", type=float, nargs=4, default=[-4.0, 4.0, 0.0, 8.0])
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=_cmd_villain_verify)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        _apply_config(args, argv)
        return args.func(args)
    except NumericalError as e:
        print(f"{type(e).__module__}: numerical failure: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"{type(e).__module__}.{type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
