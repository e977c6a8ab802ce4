"""Command-line front end.

Every subcommand prints one JSON report on stdout. Exit status: 0 when all
verdicts pass, 1 when any fails, 2 on malformed input or usage errors.
Demos that exercise an expected failure encode it as a passing verdict
(for example ``bath_dephasing_violates``).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import channels as chn
from . import correlations as corr
from . import dynamics as dyn
from . import envariance as env
from . import io, scenarios
from .errors import EnvkitError
from .states import schmidt

log = logging.getLogger("envkit")


@dataclass
class RunReport:
    command: str
    verdicts: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    timestamp: str = ""

    @property
    def passed(self) -> bool:
        return all(v.get("passed", False) for v in self.verdicts.values())

    def to_json(self, with_timestamp: bool = True) -> str:
        doc = asdict(self)
        if not with_timestamp:
            doc.pop("timestamp")
        return json.dumps(_round(doc), indent=2, sort_keys=True)


def _round(x):
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not np.isfinite(x) else float(f"{x:.12g}")
    if isinstance(x, (complex, np.complexfloating)):
        return io.encode_complex(x)
    if isinstance(x, np.ndarray):
        return _round(x.tolist())
    return x


def _verdict(passed, **diag):
    return {"passed": bool(passed), **diag}


def cmd_schmidt(args) -> RunReport:
    psi = io.state_from_json(args.state)
    if len(psi.dims) != 2:
        raise io.MalformedInput("schmidt needs a bipartite state")
    sd = schmidt(psi, args.tol)
    rep = RunReport("schmidt")
    rep.values = {
        "coeffs": sd.coeffs,
        "rank": sd.rank,
        "groups": [list(g) for g in sd.partition.groups],
        "multiplicity_counts": {str(k): v for k, v in sd.partition.counts.items()},
        "product_state": sd.rank == 1,
    }
    err = float(np.linalg.norm(sd.reconstruct() - psi.amplitudes))
    rep.verdicts["reconstruction"] = _verdict(err < 1e-9, residual=err)
    return rep


def cmd_envariance(args) -> RunReport:
    psi = io.state_from_json(args.state)
    phi_s = io.channel_from_json(args.channel_s)
    phi_e = io.channel_from_json(args.channel_e)
    if len(psi.dims) != 2 or (phi_s.dim, phi_e.dim) != psi.dims:
        raise io.MalformedInput(f"channel dims ({phi_s.dim}, {phi_e.dim}) do not match state dims {psi.dims}")
    v = env.channel_envariance_check(psi.density(), phi_s, phi_e, args.tol)
    rep = RunReport("envariance")
    rep.verdicts["envariance"] = _verdict(v.holds, residual=v.residual)
    rep.values = {"fixed_point_residuals": v.fixed_point_residuals, "purity_certificate": v.certificate}
    return rep


def cmd_partner(args) -> RunReport:
    psi = io.state_from_json(args.state)
    u_doc = io.channel_from_json(args.unitary)
    if len(u_doc.kraus) != 1:
        raise io.MalformedInput("unitary file must hold exactly one Kraus operator")
    u_s = u_doc.kraus[0]
    rep = RunReport("partner")
    try:
        u_e = env.partner_unitary(psi, u_s, args.tol)
    except env.NotAdmissible as exc:
        rep.verdicts["admissible"] = _verdict(False, residual=exc.residual, reason=str(exc))
        return rep
    v = env.unitary_envariance_check(psi, u_s, u_e, 10 * args.tol)
    rep.verdicts["admissible"] = _verdict(True)
    rep.verdicts["envariance"] = _verdict(v.holds, residual=v.residual, phase=v.phase)
    rep.values["u_e"] = io.encode_matrix(u_e)
    return rep


def cmd_discord(args) -> RunReport:
    psi = io.state_from_json(args.state)
    cfg = corr.OptimizerConfig(restarts=args.restarts, seed=args.seed)
    r = corr.discord(psi.density(), args.direction, cfg)
    rep = RunReport("discord", seed=args.seed)
    rep.values = {"I": r.mutual_information, "J": r.classical, "D": r.discord,
                  "direction": r.direction, "caveat": r.caveat}
    rep.verdicts["nonnegative"] = _verdict(r.discord >= -1e-7 and r.classical >= -1e-7)
    return rep


def cmd_easta(args) -> RunReport:
    if args.path:
        frame = dyn.build_frame(io.path_from_json(args.path))
        last = len(frame.times) - 1
        rep = RunReport("easta", seed=args.seed)
        u_s = scenarios.random_unitary(frame.dim, scenarios.sub_rng(args.seed, 0))
        u_e = dyn.easta_partner(frame, u_s, last)
        v = dyn.verify_easta(frame, u_s, u_e, last, args.tol)
        rep.verdicts["partner_random"] = _verdict(v.holds, residual=v.residual)
        rep.values = {"theta_final": frame.theta[-1], "min_gap": frame.min_gap}
        return rep
    verdicts, values = scenarios.demo_easta(args.steps, args.seed)
    return RunReport("easta", verdicts, values, seed=args.seed)


def _energies(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad energy list {text!r}") from exc


def cmd_tfd(args) -> RunReport:
    if args.spec:
        spec = io.tfd_from_json(args.spec)
        verdicts, values = scenarios.demo_tfd(spec.beta, spec.energies, args.time)
    else:
        verdicts, values = scenarios.demo_tfd(args.beta, args.energies, args.time)
    return RunReport("tfd", verdicts, values)


def cmd_demo(args) -> RunReport:
    name = args.name
    if name == "swap-damping":
        out = scenarios.demo_swap_damping()
    elif name == "nogo":
        out = scenarios.demo_nogo(args.trials, args.seed)
    elif name == "easta":
        out = scenarios.demo_easta(args.steps, args.seed)
    elif name == "tfd":
        out = scenarios.demo_tfd(args.beta, args.energies, args.time)
    else:
        out = scenarios.demo_discord(args.restarts, args.seed)
    return RunReport(f"demo {name}", out[0], out[1], seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="envkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=1e-8):
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("schmidt", help="Schmidt decomposition of a bipartite state")
    sp.add_argument("state")
    common(sp, 1e-10)
    sp.set_defaults(func=cmd_schmidt)

    sp = sub.add_parser("envariance", help="check a channel pair against a pure state")
    sp.add_argument("state")
    sp.add_argument("channel_s")
    sp.add_argument("channel_e")
    common(sp)
    sp.set_defaults(func=cmd_envariance)

    sp = sub.add_parser("partner", help="construct the envariant partner of a unitary")
    sp.add_argument("state")
    sp.add_argument("unitary", help="channel-format file holding a single unitary")
    common(sp)
    sp.set_defaults(func=cmd_partner)

    sp = sub.add_parser("discord", help="mutual information, classical correlation, discord")
    sp.add_argument("state")
    sp.add_argument("--direction", choices=["s-to-e", "e-to-s"], default="s-to-e")
    sp.add_argument("--restarts", type=int, default=32)
    common(sp)
    sp.set_defaults(func=cmd_discord)

    sp = sub.add_parser("easta", help="environment-assisted adiabatic shortcut checks")
    sp.add_argument("--path", help="Hamiltonian path JSON (default: linear Z-to-X sweep)")
    sp.add_argument("--steps", type=int, default=2001)
    common(sp, 1e-6)
    sp.set_defaults(func=cmd_easta)

    sp = sub.add_parser("tfd", help="thermofield-double static and bath checks")
    sp.add_argument("--spec", help="TFD spec JSON")
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--energies", type=_energies, default=[0.0, 1.0])
    sp.add_argument("--time", type=float, default=1.0)
    common(sp, 1e-10)
    sp.set_defaults(func=cmd_tfd)

    sp = sub.add_parser("demo", help="run a bundled acceptance scenario")
    sp.add_argument("name", choices=sorted(scenarios.DEMOS))
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--energies", type=_energies, default=[0.0, 1.0])
    sp.add_argument("--time", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=2001)
    common(sp)
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except (EnvkitError, io.MalformedInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.timestamp = datetime.now(timezone.utc).isoformat()
    print(report.to_json(with_timestamp=not args.no_timestamp))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
