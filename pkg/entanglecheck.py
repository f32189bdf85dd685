import json
import os
import sys
from typing import Optional

import typer

from banner import display_banner
from cartan.cmparams import Parity, PhiDelta, phi_delta, validate_order
from cartan.entangle import Tower, build_det_lift, verify_tower
from cartan.errors import ElementNotInGroup, EntangleError, LiftNotWellDefined, MalformedMatrix, ModulusOutOfRange
from cartan.matgroup import Mat2, mat_det
from cartan.modarith import MAX_MODULUS, require_prime
from catalog.orders import list_orders, lookup_order
from export import CHECK_CSV_FIELDS, check_rows, csv_text, dumps_json, export_to_html, report_to_dict
from logger import save_log, setup_logging
from scan import SCAN_CSV_FIELDS, scan_orders
from utils.config import load_config

app = typer.Typer(
    help="Cartan subgroups of GL2(Z/mZ) and vertical entanglement of their determinant towers.\n\n"
         "Exit codes: 0 success, 2 validation, 3 budget, 4 I/O.",
    add_completion=False,
)

IO_EXIT = 4


def fail(e):
    typer.echo(f"❌ {type(e).__name__}: {e}", err=True)
    raise typer.Exit(code=getattr(e, "exit_code", 2))


def fail_io(e):
    typer.echo(f"❌ I/O failure: {e}", err=True)
    raise typer.Exit(code=IO_EXIT)


def emit(text, out):
    """Print to stdout, or write to `out` and say so."""
    if out is None:
        typer.echo(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text if text.endswith("\n") else text + "\n")
    except OSError as e:
        fail_io(e)
    typer.echo(f"✅ Report written to {out}")


def render(data, fmt):
    if fmt == "csv":
        return csv_text(check_rows(data), CHECK_CSV_FIELDS)
    if fmt == "json":
        return dumps_json(data)
    raise EntangleError(f"unknown format {fmt!r}, use json or csv")


def check_range(n_min, n_max, p=None):
    if n_min < 1:
        raise EntangleError(f"--n-min must be at least 1, got {n_min}")
    if n_max < n_min:
        raise EntangleError(f"--n-max {n_max} is below --n-min {n_min}")
    if p is not None and p > 1 and p ** (n_max + 1) > MAX_MODULUS:
        raise ModulusOutOfRange(f"{p}^{n_max + 1} is past the largest supported modulus 2^31")


def resolve_params(p, disc=None, conductor=1, delta=None, phi=None, curve=None):
    """(PhiDelta, params block, log key) from a curve label, an order, or raw delta/phi."""
    if curve is not None or disc is not None:
        order = lookup_order(curve) if curve is not None else validate_order(disc, conductor)
        params = phi_delta(order, Parity.of(p))
        info = {"p": p, **params.as_dict(), "order": {
            "delta_K": order.delta_K, "f": order.f, "order_disc": order.order_disc,
        }}
        if curve is not None:
            info["curve"] = curve
        return params, info, order.label

    if delta is None or phi is None:
        raise EntangleError("give --disc/--conductor, --curve, or both --delta and --phi")
    params = PhiDelta.raw(delta, phi)
    return params, {"p": p, **params.as_dict()}, f"delta{delta}_phi{phi}"


@app.callback(invoke_without_command=True)
def main(ctx: typer.Context,
         verbose: bool = typer.Option(False, "--verbose", help="Debug logging from the engine.")):
    setup_logging(verbose)
    if ctx.invoked_subcommand is None:
        display_banner()
        typer.echo(ctx.get_help())


@app.command("params")
def cmd_params(disc: int = typer.Option(..., "--disc", help="Fundamental discriminant Delta_K."),
               conductor: int = typer.Option(1, "--conductor"),
               parity: Parity = typer.Option(Parity.EVEN, "--parity", help="Parity of the modulus m.")):
    """Print phi and delta for an order and a modulus parity."""
    try:
        order = validate_order(disc, conductor)
        result = phi_delta(order, parity)
    except EntangleError as e:
        fail(e)
    typer.echo(json.dumps(result.as_dict(), separators=(",", ":")))


@app.command("check")
def cmd_check(disc: Optional[int] = typer.Option(None, "--disc"),
              conductor: int = typer.Option(1, "--conductor"),
              curve: Optional[str] = typer.Option(None, "--curve", help="Label from the catalog, e.g. 32a3."),
              delta: Optional[int] = typer.Option(None, "--delta"),
              phi: Optional[int] = typer.Option(None, "--phi"),
              p: int = typer.Option(2, "--p"),
              n_min: int = typer.Option(1, "--n-min"),
              n_max: Optional[int] = typer.Option(None, "--n-max"),
              fmt: str = typer.Option("json", "--format", help="json or csv."),
              out: Optional[str] = typer.Option(None, "--out"),
              save: bool = typer.Option(False, "--save-log", help="Keep the report under the logs directory.")):
    """Kernel, lift, diagram and index checks on the full normalizer tower."""
    try:
        config = load_config()
        n_max = config["n_max"] if n_max is None else n_max
        check_range(n_min, n_max, p)
        order_params, info, key = resolve_params(p, disc, conductor, delta, phi, curve)
        tower = Tower.full_normalizer(p, order_params, n_top=n_max + 1, n_min=n_min, cap=config["closure_cap"])
        data = report_to_dict(info, verify_tower(tower, n_min, n_max))
        text = render(data, fmt)
    except EntangleError as e:
        fail(e)

    if save:
        try:
            save_log("check", p, key, data, base_dir=config["logs_dir"])
        except OSError as e:
            fail_io(e)
    emit(text, out)


@app.command("lift")
def cmd_lift(element: str = typer.Option(..., "--element", help='Matrix "a11,a12,a21,a22" mod p^n.'),
             n: int = typer.Option(..., "--n"),
             p: int = typer.Option(2, "--p"),
             delta: Optional[int] = typer.Option(None, "--delta"),
             phi: Optional[int] = typer.Option(None, "--phi"),
             disc: Optional[int] = typer.Option(None, "--disc"),
             conductor: int = typer.Option(1, "--conductor"),
             curve: Optional[str] = typer.Option(None, "--curve")):
    """Evaluate Lambda(g) = det(g') mod p^{n+1} for g in N(p^n)."""
    try:
        check_range(n, n, p)
        config = load_config()
        order_params, _, _ = resolve_params(p, disc, conductor, delta, phi, curve)
        tower = Tower.full_normalizer(p, order_params, n_top=n + 1, n_min=n, cap=config["closure_cap"])
        g = Mat2.parse(element, tower.modulus(n))
        if g not in tower.level(n):
            raise ElementNotInGroup(f"{g} is not in N({p}^{n})")
        det_lift = build_det_lift(tower, n)
        if not det_lift.well_defined:
            g1, g2 = det_lift.failure_witness
            raise LiftNotWellDefined(
                f"preimages {g1} and {g2} have determinants {mat_det(g1).value} and {mat_det(g2).value}",
                det_lift.failure_witness,
            )
        value = det_lift(g)
    except EntangleError as e:
        fail(e)
    typer.echo(f"{value.value} (mod {value.modulus})")


@app.command("scan")
def cmd_scan(disc_min: int = typer.Option(..., "--disc-min"),
             disc_max: int = typer.Option(..., "--disc-max"),
             f_max: int = typer.Option(1, "--f-max"),
             p: int = typer.Option(2, "--p"),
             n_max: Optional[int] = typer.Option(None, "--n-max"),
             out: str = typer.Option(..., "--out"),
             workers: Optional[int] = typer.Option(None, "--workers")):
    """Kernel verdicts and n0 for every order in a discriminant box, as CSV."""
    try:
        config = load_config()
        n_max = config["n_max"] if n_max is None else n_max
        check_range(1, n_max, p)
        if disc_min > disc_max:
            raise EntangleError(f"--disc-min {disc_min} is above --disc-max {disc_max}")
        rows = scan_orders(disc_min, disc_max, f_max, p, n_max,
                           workers=workers or config["workers"], cap=config["closure_cap"])
    except EntangleError as e:
        fail(e)

    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(csv_text([row.as_dict() for row in rows], SCAN_CSV_FIELDS))
    except OSError as e:
        fail_io(e)

    typer.echo(f"✅ {len(rows)} rows written to {out}")
    if p == 2:
        stragglers = {(r.delta_K, r.f) for r in rows if r.order_disc % 2 == 0 and r.n0 != 2}
        for delta_K, f in sorted(stragglers):
            typer.echo(f"❌ even discriminant order ({delta_K}, {f}) did not reach n0 = 2")


def load_generators(path, p):
    """Read {"n": ["a11,a12,a21,a22", ...]} into Mat2 lists mod p^n."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise MalformedMatrix(f"{path} is not JSON: {e}") from None
    if not isinstance(raw, dict):
        raise MalformedMatrix(f"{path} must map levels to matrix lists")

    generators = {}
    for level, matrices in raw.items():
        try:
            n = int(level)
        except ValueError:
            raise MalformedMatrix(f"level {level!r} is not an integer") from None
        if n < 1:
            raise MalformedMatrix(f"level {n} is below 1")
        if not isinstance(matrices, list) or not all(isinstance(text, str) for text in matrices):
            raise MalformedMatrix(f"level {n} must list matrices as \"a11,a12,a21,a22\" strings")
        generators[n] = [Mat2.parse(text, p**n) for text in matrices]
    return generators


@app.command("tower")
def cmd_tower(generators_file: str = typer.Option(..., "--generators-file"),
              p: int = typer.Option(2, "--p"),
              n_max: Optional[int] = typer.Option(None, "--n-max"),
              fmt: str = typer.Option("json", "--format"),
              out: Optional[str] = typer.Option(None, "--out"),
              save: bool = typer.Option(False, "--save-log")):
    """Run the full verdict suite on a tower given by generators per level."""
    try:
        config = load_config()
        require_prime(p)
        generators = load_generators(generators_file, p)
        user_tower = Tower.generated(p, generators, cap=config["closure_cap"])
        n_max = user_tower.n_top - 1 if n_max is None else n_max
        check_range(user_tower.n_min, n_max, p)
        info = {"p": p, "source": "generated", "generators_file": generators_file}
        data = report_to_dict(info, verify_tower(user_tower, user_tower.n_min, n_max))
        text = render(data, fmt)
    except EntangleError as e:
        fail(e)
    except OSError as e:
        fail_io(e)

    if save:
        key = os.path.splitext(os.path.basename(generators_file))[0]
        try:
            save_log("tower", p, key, data, base_dir=config["logs_dir"])
        except OSError as e:
            fail_io(e)
    emit(text, out)


@app.command("catalog")
def cmd_catalog():
    """List the curves whose CM orders are on file."""
    try:
        rows = list_orders()
    except EntangleError as e:
        fail(e)
    typer.echo(dumps_json(rows))


@app.command("export")
def cmd_export():
    """Render every saved log into one HTML report."""
    try:
        config = load_config()
        path = export_to_html(config["logs_dir"], config["reports_dir"])
    except EntangleError as e:
        fail(e)
    except OSError as e:
        fail_io(e)
    typer.echo(f"✅ HTML report created: {path}")


if __name__ == "__main__":
    sys.stdout.reconfigure(encoding="utf-8")
    app()
