"""Thin-client CLI for the simulation service.

All commands talk to the HTTP API: against a remote server when --server
is given, otherwise against an in-process instance of the app.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import yaml


class _Client:
    def __init__(self, server=None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path, payload):
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            raise click.ClickException(f"{path} failed ({resp.status_code}): {resp.text}")
        return resp.json()


def _load_yaml(path):
    with open(path) as f:
        return yaml.safe_load(f)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    ctx.obj = _Client(server)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", default=None, type=click.Path(),
              help="Directory for the per-chain CSV (written client-side).")
@click.option("--seed", default=None, type=int, help="Override config seed.")
@click.option("--chain", default=None, help="Override config chain.")
@click.pass_obj
def run(client, config_path, out_dir, seed, chain):
    """Run a BER sweep for one chain."""
    data = client.post("/runs", {
        "config": _load_yaml(config_path),
        "seed": seed,
        "chain": chain,
    })
    for p in data["points"]:
        click.echo(f"Es/N0 {p['es_n0_db']:>6g} dB  ber {p['ber']:.3e}  "
                   f"({p['bit_errors']}/{p['bits']} bits, "
                   f"{p['codewords']} codewords, {p['seconds']:.1f} s)")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{data['chain']}.csv"
        path.write_text(data["csv"], encoding="utf-8", newline="\n")
        click.echo(f"wrote {path}")


@main.command()
@click.argument("csvs", nargs=-1, required=True, type=click.Path(exists=True))
@click.pass_obj
def summarize(client, csvs):
    """Print an aligned comparison table for one or more sweep CSVs."""
    texts = {Path(p).stem: Path(p).read_text(encoding="utf-8") for p in csvs}
    data = client.post("/summarize", {"csv_texts": texts})
    click.echo(data["table"], nl=False)


@main.command("kernel-report")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@click.pass_obj
def kernel_report(client, config_path, out_path):
    """Run the GP-theory validation suite and emit its report."""
    cfg = _load_yaml(config_path) if config_path else {}
    data = client.post("/kernel-report", {"config": cfg})
    if out_path:
        Path(out_path).write_text(data["report"], encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(data["report"], nl=False)


@main.command("validate-config")
@click.argument("config_path", type=click.Path(exists=True))
@click.pass_obj
def validate_config(client, config_path):
    """Validate an experiment config file."""
    data = client.post("/config/validate", {"config": _load_yaml(config_path)})
    for w in data["warnings"]:
        click.echo(f"warning: {w}")
    if data["valid"]:
        click.echo("config ok")
    else:
        for e in data["errors"]:
            click.echo(f"error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
