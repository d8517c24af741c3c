"""Command-line front end: a thin client of the compute service.

By default requests run against the in-process ASGI app (no sockets, byte
identical output across runs); --server redirects them to a remote
instance.  Exit codes: 0 success, 2 config error, 3 numerical breakdown.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BREAKDOWN = 3


def _log_level():
    return os.environ.get("ELLATTICE_LOG", "quiet")


def _info(msg):
    if _log_level() in ("info", "debug"):
        print(msg, file=sys.stderr)


def _debug(msg):
    if _log_level() == "debug":
        print(msg, file=sys.stderr)


def make_client(server=None):
    if server:
        return httpx.Client(base_url=server, timeout=120.0)
    # in-process: drive the ASGI app through the synchronous test transport
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient
    from .service.app import app
    return TestClient(app, raise_server_exceptions=False)


class CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _post(client, url, payload=None):
    _debug(f"POST {url}")
    resp = client.post(url, json=payload if payload is not None else {})
    if resp.status_code == 422:
        raise CliFailure(EXIT_CONFIG, f"config error: {resp.text}")
    if resp.status_code == 400:
        detail = resp.json().get("detail", {})
        kind = detail.get("kind") if isinstance(detail, dict) else None
        code = EXIT_BREAKDOWN if kind == "breakdown" else EXIT_CONFIG
        raise CliFailure(code, f"{kind or 'error'}: "
                               f"{detail.get('message', resp.text)}")
    resp.raise_for_status()
    return resp.json()


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliFailure(EXIT_CONFIG, f"cannot read config {path}: {exc}")


def _parse_range(text):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise CliFailure(EXIT_CONFIG, f"bad --range {text!r}, expected A:B")


def _emit(text, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        _info(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _jdump(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# -- subcommand handlers -------------------------------------------------------

def cmd_curve(args, client):
    cfg = _load_config(args.config)
    data = _post(client, "/curve/build", {"curve": cfg})
    _emit(_jdump(data), args.out)


def cmd_lattice(args, client):
    cfg = _load_config(args.config)
    lo, hi = _parse_range(args.range)
    payload = {"curve": cfg["curve"], "walk": cfg["walk"], "lo": lo, "hi": hi}
    data = _post(client, "/lattice/walk", payload)
    lines = ["n,re_x,im_x,re_y,im_y"]
    for n, x, y in zip(data["n"], data["x"], data["y"]):
        lines.append(f"{n},{x[0]:.12g},{x[1]:.12g},{y[0]:.12g},{y[1]:.12g}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_elliptic(args, client):
    cfg = _load_config(args.config)
    payload = {"curve": cfg["curve"], "walk": cfg["walk"]}
    if "lo" in cfg:
        payload["lo"] = cfg["lo"]
    if "hi" in cfg:
        payload["hi"] = cfg["hi"]
    data = _post(client, "/elliptic/profile", payload)
    out = {
        "lambda": data["lam"][0],
        "k": data["k"][0],
        "h": data["h"][0],
        "g": data["g"][0],
        "K": data["K"][0],
        "Kprime": data["Kprime"][0],
        "p": data["p"][0],
        "n_period": data["n_period"][0],
        "C_theta": data["C_theta"],
    }
    _emit(_jdump(out), args.out)


def cmd_divdiff(args, client):
    cfg = _load_config(args.config)
    data = _post(client, "/divdiff/check", cfg)
    lines = [f"C_{{m,r,s}} forms (m={cfg.get('m', 2)}):"]
    for i, f in enumerate(data["C_forms"], start=1):
        lines.append(f"  form {i}: {f[0]:+.12e} {f[1]:+.12e}j")
    lines.append(f"  spread: {data['spread']:.3e}")
    lines.append(f"  adjoint C: {data['adjoint_C'][0]:+.12e} "
                 f"{data['adjoint_C'][1]:+.12e}j "
                 f"(spread {data['adjoint_spread']:.3e})")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_expand(args, client):
    cfg = _load_config(args.config)
    cfg.setdefault("kind", args.kind)
    cfg["kind"] = args.kind
    if args.levels is not None:
        cfg["terms"] = args.levels
    data = _post(client, "/expand/solve", cfg)
    points = list(data["partial_sums"])
    header = ["n", "x_n", "y_n", "f(x_n)"] + [f"S_n({p})" for p in points]
    lines = [",".join(header)]
    for i, n in enumerate(data["n"]):
        row = [str(n), f"{data['x'][i][0]:.12g}", f"{data['y'][i][0]:.12g}",
               f"{data['f'][i][0]:.12g}"]
        row += [f"{data['partial_sums'][p][i][0]:.12g}" for p in points]
        lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args.out)


def cmd_contfrac(args, client):
    if args.mode == "thiele":
        if not args.nodes:
            raise CliFailure(EXIT_CONFIG, "contfrac thiele needs --nodes")
        try:
            rows = [line.split(",") for line in
                    Path(args.nodes).read_text().strip().splitlines()[1:]]
            nodes = [float(r[0]) for r in rows]
            values = [float(r[1]) for r in rows]
        except (OSError, ValueError, IndexError) as exc:
            raise CliFailure(EXIT_CONFIG, f"bad nodes file: {exc}")
        data = _post(client, "/contfrac/thiele",
                     {"nodes": nodes, "values": values})
    else:
        cfg = _load_config(args.config)
        if args.levels is not None:
            cfg["levels"] = args.levels
        data = _post(client, "/contfrac/sqrtp", cfg)
    _emit(_jdump(data), args.out)


def cmd_riccati(args, client):
    payload = {"family": args.family, "levels": args.levels or 8,
               "params": json.loads(args.params) if args.params else {}}
    data = _post(client, "/riccati/ladder", payload)
    _emit(_jdump(data), args.out)


def cmd_biorth(args, client):
    cfg = _load_config(args.form)
    if args.depth is not None:
        cfg["depth"] = args.depth
    data = _post(client, "/biorth/run", cfg)
    _emit(_jdump(data), args.out)


def cmd_secondord(args, client):
    cfg = _load_config(args.config)
    if args.levels is not None:
        cfg["levels"] = args.levels
    if args.truncate is not None:
        cfg["truncate"] = args.truncate
    data = _post(client, "/secondord/run", cfg)
    _emit(_jdump(data), args.out)


def cmd_paper_tables(args, client):
    data = _post(client, "/paper-tables")
    outdir = Path(args.out or "paper-tables")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, content in sorted(data["files"].items()):
        (outdir / name).write_text(content)
    n_bad = len(data["mismatches"])
    summary = [f"files: {len(data['files'])}",
               f"mismatches beyond tolerance: {n_bad}"]
    for mm in data["mismatches"]:
        summary.append("  " + " ".join(mm))
    (outdir / "summary.txt").write_text("\n".join(summary) + "\n")
    print("\n".join(summary))
    return EXIT_OK if n_bad == 0 else EXIT_BREAKDOWN


def build_parser():
    ap = argparse.ArgumentParser(
        prog="ellgrid",
        description="difference calculus on elliptic lattices")
    ap.add_argument("--server", help="remote service URL "
                                     "(default: in-process)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", help="output path")
        p.add_argument("--tol", type=float, help="tolerance override (unused "
                                                 "by most commands)")
        return p

    common(sub.add_parser("curve", help="build and check a biquadratic curve"))
    p = common(sub.add_parser("lattice", help="emit a lattice walk as CSV"))
    p.add_argument("--range", default="-1:10", help="index range A:B")
    common(sub.add_parser("elliptic", help="elliptic profile as JSON"))
    common(sub.add_parser("divdiff", help="four-way product-map constants"))
    p = common(sub.add_parser("expand", help="first-order equation tables"))
    p.add_argument("kind", choices=["psilog", "exp"])
    p.add_argument("--levels", type=int, help="number of terms")
    p = sub.add_parser("contfrac", help="continued fractions")
    p.add_argument("mode", choices=["thiele", "sqrtp"])
    p.add_argument("--nodes", help="CSV of node,value rows (thiele)")
    p.add_argument("--config", help="JSON config (sqrtp)")
    p.add_argument("--levels", type=int)
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    p = sub.add_parser("riccati", help="Laguerre-Hahn ladder")
    p.add_argument("--family", required=True)
    p.add_argument("--levels", type=int)
    p.add_argument("--params", help="JSON dict of family parameters")
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    p = sub.add_parser("biorth", help="biorthogonal rational functions")
    p.add_argument("--form", required=True, help="JSON form description")
    p.add_argument("--depth", type=int)
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    p = common(sub.add_parser("secondord", help="second-order operator"))
    p.add_argument("--levels", type=int)
    p.add_argument("--truncate", type=int)
    p = sub.add_parser("paper-tables", help="regenerate all golden tables")
    p.add_argument("--out", help="output directory")
    p.add_argument("--tol", type=float)
    return ap


HANDLERS = {
    "curve": cmd_curve,
    "lattice": cmd_lattice,
    "elliptic": cmd_elliptic,
    "divdiff": cmd_divdiff,
    "expand": cmd_expand,
    "contfrac": cmd_contfrac,
    "riccati": cmd_riccati,
    "biorth": cmd_biorth,
    "secondord": cmd_secondord,
    "paper-tables": cmd_paper_tables,
}


def _merge_range(argv):
    """Let `--range -1:10` work even though the value starts with a dash."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--range":
            try:
                out.append(f"--range={next(it)}")
            except StopIteration:
                out.append(tok)
        else:
            out.append(tok)
    return out


def main(argv=None):
    ap = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    argv = _merge_range(list(argv))
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help: pass through
        return exc.code if exc.code else EXIT_OK
    try:
        with make_client(args.server) as client:
            code = HANDLERS[args.command](args, client)
            return EXIT_OK if code is None else code
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
