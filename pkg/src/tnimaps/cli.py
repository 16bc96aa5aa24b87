"""Command-line front end.

Subcommands: ``sample`` (random states, subnormalized states, TNI Choi
matrices, reduced spectra), ``volume`` (exact closed forms), ``density``
(CSV tabulation of the spectral densities), ``channel`` (Choi checks, Kraus
extraction, extremal-map construction) and ``verify`` (Monte-Carlo suites).

Machine-readable results go to stdout (JSON or CSV); human summaries go to
stderr.  Seeds default to 0, never to the clock, so identical invocations
produce identical bytes.  Exit codes: 0 success, 1 failed verification,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from fractions import Fraction

import numpy as np

from . import __version__, channels, measures, montecarlo
from .channels import (
    ChoiForm,
    ExtremalSpec,
    checked,
    choi_from_json,
    choi_to_json,
    kraus_from_choi,
    kraus_to_json,
    make_k_extremal,
    rescale_to_tni,
    verify_extremal_properties,
)
from .linalg import partial_trace
from .sampling import Sampler, SamplerConfig
from .states import state_to_json

_EXACT_VOLUMES = ("vol_states", "vol_sub", "vol_flag", "vol_tni")
_EXACT_RATIONALS = (
    "b_norm",
    "c_norm",
    "ch_measure",
    "selberg_i",
    "cube_measure",
    "box_sub_ratio",
    "tni_fraction",
)


def _count(text: str) -> int:
    """Parse a sample count, accepting scientific notation like 1e6."""
    value = float(text)
    if value < 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"bad count {text!r}")
    return int(value)


def _out_stream(path: str | None):
    return open(path, "w") if path else sys.stdout


def _emit(payload, path: str | None) -> None:
    stream = _out_stream(path)
    try:
        stream.write(payload)
        if not payload.endswith("\n"):
            stream.write("\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


def _finite(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def _cmd_sample(args: argparse.Namespace) -> int:
    n = args.n
    k = args.k if args.k is not None else n
    sampler = Sampler(SamplerConfig(seed=args.seed, stream_id=args.stream))
    lines: list[str] = []
    csv_rows: list[list[float]] = []
    for _ in range(args.count):
        if args.kind == "density":
            rho = sampler.density_induced(n, k)
            lines.append(json.dumps(state_to_json(rho), separators=(",", ":")))
            csv_rows.append(sorted(np.linalg.eigvalsh(rho).tolist(), reverse=True))
        elif args.kind == "sub":
            sigma = sampler.subnormalized_matrix(n, k)
            lines.append(json.dumps(state_to_json(sigma), separators=(",", ":")))
            csv_rows.append(sorted(np.linalg.eigvalsh(sigma).tolist(), reverse=True))
        elif args.kind == "tni-choi":
            choi = sampler.tni_choi(n, budget=args.budget)
            lines.append(json.dumps(choi_to_json(choi), separators=(",", ":")))
            csv_rows.append(
                sorted(np.linalg.eigvalsh(choi.sigma).tolist(), reverse=True)
            )
        else:  # spectrum
            lam = sampler.reduced_spectrum(n, k)
            lines.append(json.dumps({"spectrum": lam.tolist()}, separators=(",", ":")))
            csv_rows.append(lam.tolist())
    if args.format == "json":
        _emit("\n".join(lines), args.output)
    else:
        header = ",".join(f"lambda{i + 1}" for i in range(len(csv_rows[0])))
        body = "\n".join(",".join(repr(v) for v in row) for row in csv_rows)
        _emit(header + "\n" + body, args.output)
    print(f"emitted {args.count} {args.kind} sample(s), N={n} K={k}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# volume
# ---------------------------------------------------------------------------


def _volume_entries(n: int, k: int) -> list[dict]:
    alpha = k - n + 1
    entries = [
        ("vol_states", measures.vol_states(n, k)),
        ("vol_sub", measures.vol_sub(n, k)),
        ("vol_flag", measures.vol_flag(n)),
        ("vol_tni", measures.vol_tni(n)),
        ("b_norm", measures.b_norm(n, k)),
        ("c_norm", measures.c_norm(n, alpha)),
        ("ch_measure", measures.ch_measure(n, k)),
        ("selberg_i", measures.selberg_i(n, k)),
        ("cube_measure", measures.cube_measure(n, k)),
        ("box_sub_ratio", measures.box_sub_ratio(n, k)),
        ("tni_fraction", measures.tni_fraction(n)),
    ]
    out = []
    for name, value in entries:
        if isinstance(value, measures.ExactVolume):
            out.append(
                {
                    "formula": name,
                    "exact": value.exact_str(),
                    "decimal": value.decimal(50),
                }
            )
        else:
            dec = measures.ExactVolume(Fraction(value)).decimal(50)
            out.append({"formula": name, "exact": str(value), "decimal": dec})
    return out


def _cmd_volume(args: argparse.Namespace) -> int:
    n = args.n
    k = args.k if args.k is not None else n
    entries = _volume_entries(n, k)
    if not args.all:
        wanted = set(args.quantity or ["vol_states", "vol_sub"])
        unknown = wanted - {e["formula"] for e in entries}
        if unknown:
            print(f"unknown quantities: {sorted(unknown)}", file=sys.stderr)
            return 2
        entries = [e for e in entries if e["formula"] in wanted]
    _emit(json.dumps(entries, indent=2, sort_keys=True), args.output)
    for e in entries:
        print(f"{e['formula']:<14} = {e['exact']}  ~ {e['decimal'][:20]}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------


def _cmd_density(args: argparse.Namespace) -> int:
    pts = args.points
    rows = []
    if args.which == "radial2":
        header = "r,density"
        for r in np.linspace(-0.5, 0.5, pts):
            rows.append(f"{r!r},{float(measures.density_radial_2(r))!r}")
    elif args.which == "polar3":
        header = "r,phi,density"
        for r in np.linspace(0.0, 2.0 / 3.0, pts):
            for phi in np.linspace(0.0, 2.0 * math.pi, pts, endpoint=False):
                rows.append(
                    f"{r!r},{phi!r},{float(measures.density_polar_3(r, phi))!r}"
                )
    else:  # eigs
        n = args.n
        k = args.k if args.k is not None else n
        if n == 2:
            header = "lambda1,density"
            for lam in np.linspace(0.0, 1.0, pts):
                val = measures.density_eigs(2, k, np.array([lam, 1.0 - lam]))
                rows.append(f"{lam!r},{val!r}")
        elif n == 3:
            header = "lambda1,lambda2,density"
            for l1 in np.linspace(0.0, 1.0, pts):
                for l2 in np.linspace(0.0, 1.0 - l1, max(2, int(pts * (1 - l1)) + 1)):
                    l3 = 1.0 - l1 - l2
                    if l3 < -1e-12:
                        continue
                    val = measures.density_eigs(3, k, np.array([l1, l2, max(l3, 0.0)]))
                    rows.append(f"{l1!r},{l2!r},{val!r}")
        else:
            print("density eigs tabulation supports --n 2 or 3", file=sys.stderr)
            return 2
    _emit(header + "\n" + "\n".join(rows), args.output)
    print(f"tabulated {len(rows)} {args.which} points", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# channel
# ---------------------------------------------------------------------------


def _read_json(path: str) -> dict:
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _cmd_channel(args: argparse.Namespace) -> int:
    if args.channel_cmd == "check":
        choi = checked(choi_from_json(_read_json(args.file)))
        reduced = partial_trace(choi.sigma, choi.n, choi.n, "A")
        spectrum = sorted(np.linalg.eigvalsh(reduced).tolist(), reverse=True)
        result = {
            "cp": choi.is_cp,
            "tp": choi.is_tp,
            "tni": choi.is_tni,
            "trace": float(choi.sigma.trace().real),
            "reduced_spectrum": spectrum,
        }
        _emit(json.dumps(result, indent=2, sort_keys=True), args.output)
        return 0
    if args.channel_cmd == "kraus":
        choi = choi_from_json(_read_json(args.file))
        ks = kraus_from_choi(choi, rank_tol=args.rank_tol)
        _emit(json.dumps(kraus_to_json(ks), separators=(",", ":")), args.output)
        print(f"{len(ks.operators)} operator(s)", file=sys.stderr)
        return 0
    # make-extremal
    zeta = tuple(int(s) for s in args.zeta.split(",")) if args.zeta else ()
    omega = None
    if args.omega:
        from .linalg import matrix_from_json

        omega = matrix_from_json(_read_json(args.omega))
    choi = make_k_extremal(ExtremalSpec(n=args.n, zeta=zeta, omega=omega))
    _emit(json.dumps(choi_to_json(choi), separators=(",", ":")), args.output)
    print(f"k-extremal map, N={args.n}, zeta={list(zeta)}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _check(name: str, passed: bool, **extra) -> dict:
    entry = {"name": name, "passed": bool(passed)}
    for key, value in extra.items():
        if isinstance(value, float):
            entry[key] = _finite(value)
        else:
            entry[key] = value
    return entry


def _mc_check(name: str, report: montecarlo.McReport) -> dict:
    return _check(
        name,
        report.passed,
        estimate=report.estimate,
        target=report.target,
        z=report.z_score,
        n=report.n_samples,
    )


def _suite_volumes(samples: int, seed: int, stream: int) -> list[dict]:
    checks = []
    ok = all(
        measures.vol_sub(n, n) * (n * n) * measures.ExactVolume(Fraction(1), 0, n)
        == measures.vol_states(n, n)
        for n in range(1, 5)
    )
    checks.append(_check("exact.cone_scaling", ok))
    ok = all(
        measures.vol_tni(n)
        == measures.vol_flag(n * n)
        / math.factorial(n * n)
        * measures.cube_measure(n, n**3)
        for n in range(1, 4)
    )
    checks.append(_check("exact.tni_factorization", ok))
    ok = all(
        measures.box_sub_ratio(n, k)
        == n * k * measures.c_norm(n, k - n + 1) * measures.cube_measure(n, k)
        for n, k in ((2, 2), (2, 8), (3, 3), (3, 27))
    )
    checks.append(_check("exact.box_ratio_routes", ok))
    checks.append(_check("exact.b_norm_2_8", measures.b_norm(2, 8) == 180180))

    cfg = SamplerConfig(seed=seed, stream_id=stream)
    checks.append(
        _mc_check("mc.box_fraction_2_2", montecarlo.estimate_box_fraction(2, 2, samples, cfg))
    )
    checks.append(
        _mc_check("mc.box_fraction_2_8", montecarlo.estimate_box_fraction(2, 8, samples, cfg))
    )
    checks.append(
        _mc_check("mc.tni_acceptance_2", montecarlo.estimate_tni_acceptance(2, samples, cfg))
    )
    for n, k in ((1, 1), (2, 2), (2, 8)):
        checks.append(
            _mc_check(
                f"mc.scaling_{n}_{k}", montecarlo.test_scaling_lemma1(n, k, samples, cfg)
            )
        )
    return checks


def _suite_densities(samples: int, seed: int, stream: int) -> list[dict]:
    cfg = SamplerConfig(seed=seed, stream_id=stream)
    checks = []
    radial = montecarlo.test_radial_density_2(samples, cfg)
    checks.append(
        _check("mc.radial_ks_2", radial.passed, ks=radial.ks_statistic, threshold=radial.threshold)
    )
    polar = montecarlo.test_polar_density_3(samples, cfg)
    checks.append(
        _check(
            "mc.polar_chi2_3",
            polar.passed,
            chi2=polar.chi_square.ks_statistic,
            p_value=polar.chi_square.p_value,
            sectors=list(polar.sector_counts),
        )
    )
    cone = montecarlo.test_cone_height(2, samples, cfg, envelope=0.05)
    checks.append(_mc_check("mc.cone_height_2", cone))
    return checks


def _suite_channels(samples: int, seed: int, stream: int) -> list[dict]:
    sampler = Sampler(SamplerConfig(seed=seed, stream_id=stream))
    trials = max(10, min(100, samples // 1000))
    worst_round = 0.0
    worst_apply = 0.0
    tp_implies_tni = True
    for n in (2, 3):
        for _ in range(trials):
            choi = rescale_to_tni(
                ChoiForm(n=n, sigma=sampler.density_induced(n * n, n * n), is_cp=True)
            )
            ks = kraus_from_choi(choi)
            back = channels.choi_from_kraus(ks)
            worst_round = max(
                worst_round, float(np.abs(back.sigma - choi.sigma).max())
            )
            rho = sampler.density_induced(n, n)
            via_super = channels.apply(channels.superop_from_choi(choi), rho)
            via_kraus = channels.apply(ks, rho)
            worst_apply = max(worst_apply, float(np.abs(via_super - via_kraus).max()))
            c = checked(choi)
            if c.is_tp and not c.is_tni:
                tp_implies_tni = False
    checks = [
        _check("channels.kraus_roundtrip", worst_round <= 1e-8, residual=worst_round),
        _check("channels.apply_agreement", worst_apply <= 1e-9, residual=worst_apply),
        _check("channels.tp_implies_tni", tp_implies_tni),
    ]
    extremal_ok = True
    for n in (2, 3):
        for mask in range(2**n):
            zeta = tuple(i + 1 for i in range(n) if mask & (1 << i))
            spec = ExtremalSpec(n=n, zeta=zeta)
            report = verify_extremal_properties(
                make_k_extremal(spec), spec, n_random=20,
                config=SamplerConfig(seed=seed, stream_id=stream + 1),
            )
            extremal_ok = extremal_ok and report.passed
    checks.append(_check("channels.extremal_properties", extremal_ok))
    return checks


def _cmd_verify(args: argparse.Namespace) -> int:
    suites = {
        "volumes": _suite_volumes,
        "densities": _suite_densities,
        "channels": _suite_channels,
    }
    names = sorted(suites) if args.suite == "all" else [args.suite]
    report = []
    for name in names:
        checks = suites[name](args.samples, args.seed, args.stream)
        report.append(
            {
                "suite": name,
                "passed": all(c["passed"] for c in checks),
                "checks": checks,
            }
        )
    payload = json.dumps(report, indent=2, sort_keys=True)
    _emit(payload, args.output)
    all_passed = all(s["passed"] for s in report)
    for s in report:
        for c in s["checks"]:
            status = "pass" if c["passed"] else "FAIL"
            print(f"[{status}] {s['suite']}.{c['name']}", file=sys.stderr)
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnimaps",
        description="Subnormalized states and trace-nonincreasing maps: "
        "exact volumes, sampling, channel checks, Monte-Carlo verification.",
    )
    parser.add_argument("--version", action="version", version=f"tnimaps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw random states, maps or spectra")
    p.add_argument("--kind", choices=["density", "sub", "tni-choi", "spectrum"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--count", type=_count, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--budget", type=_count, default=10**7)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("volume", help="print exact closed-form constants")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--all", action="store_true")
    p.add_argument("--quantity", action="append")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_volume)

    p = sub.add_parser("density", help="tabulate spectral densities to CSV")
    p.add_argument("--which", choices=["radial2", "polar3", "eigs"], required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("channel", help="Choi checks, Kraus extraction, extremal maps")
    csub = p.add_subparsers(dest="channel_cmd", required=True)
    c = csub.add_parser("check", help="classify a Choi matrix (cp/tp/tni)")
    c.add_argument("file", help="Choi JSON file, or - for stdin")
    c.add_argument("--output", default=None)
    c = csub.add_parser("kraus", help="extract Kraus operators from a Choi matrix")
    c.add_argument("file", help="Choi JSON file, or - for stdin")
    c.add_argument("--rank-tol", type=float, default=1e-12)
    c.add_argument("--output", default=None)
    c = csub.add_parser("make-extremal", help="build a k-extremal map")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--zeta", default="", help="comma-separated subset of 1..N")
    c.add_argument("--omega", default=None, help="matrix JSON file for the output state")
    c.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_channel)

    p = sub.add_parser("verify", help="run Monte-Carlo verification suites")
    p.add_argument("suite", choices=["volumes", "densities", "channels", "all"])
    p.add_argument("--samples", type=_count, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_verify)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
