"""Command line interface.

Scenario runs on the virtual clock execute in-process; live runs serve the
mesh over HTTP and drive it as a client. ``fault`` is a thin client for
poking a served node during demos.
"""

import json
import sys
from pathlib import Path

import click
import httpx

from .errors import AdaptiFlowError
from .scenarios import diff_timelines, load_scenario, render_timeline, run_scenario


@click.group()
def main() -> None:
    """Self-adaptation scenario runner for the simulated store mesh."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--horizon-s", type=float, default=None, help="Override the document horizon.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--live", is_flag=True, help="Real clock over served HTTP nodes.")
@click.option("--interval-ms", type=int, default=None, help="Override the polling interval.")
@click.option("--profile", "profile_path", type=click.Path(exists=True), default=None)
@click.option("--transport", type=click.Choice(["loopback", "socket"]), default="loopback",
              show_default=True, help="Cross-node transport for virtual-clock runs.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the report document.")
def run(scenario_path, horizon_s, seed, live, interval_ms, profile_path, transport, out_path):
    """Run a scenario and print its timeline."""
    try:
        spec = load_scenario(scenario_path)
        if live:
            from .live import run_live

            report = run_live(spec, horizon_s=horizon_s, seed=seed,
                              interval_ms=interval_ms, profile_override=profile_path)
        else:
            report = run_scenario(
                spec,
                horizon_s=horizon_s,
                seed=seed,
                interval_ms=interval_ms,
                transport_kind=transport,
                profile_override=profile_path,
            )
    except AdaptiFlowError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(render_timeline(report))
    if out_path:
        Path(out_path).write_text(report.to_json())
        click.echo(f"report written to {out_path}")
    if not report.all_passed():
        sys.exit(1)


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
def validate(scenario_path):
    """Validate a scenario document without running it."""
    try:
        spec = load_scenario(scenario_path)
    except AdaptiFlowError as exc:
        raise click.ClickException(str(exc)) from exc
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"malformed document: {exc}") from exc
    nodes = ", ".join(spec.node_ids)
    click.echo(f"{spec.name}: valid ({len(spec.node_ids)} nodes: {nodes})")


@main.command()
@click.argument("report_a", type=click.Path(exists=True))
@click.argument("report_b", type=click.Path(exists=True))
def diff(report_a, report_b):
    """Structural diff of two report documents."""
    doc_a = json.loads(Path(report_a).read_text())
    doc_b = json.loads(Path(report_b).read_text())
    diffs = diff_timelines(doc_a, doc_b)
    if not diffs:
        click.echo("reports are identical")
        return
    for d in diffs:
        click.echo(f"{d['node']}.{d['kind']}[{d['index']}]:")
        click.echo(f"  a: {json.dumps(d['a'], sort_keys=True, default=str)}")
        click.echo(f"  b: {json.dumps(d['b'], sort_keys=True, default=str)}")
    click.echo(f"{len(diffs)} divergence(s)")
    sys.exit(1)


@main.command()
@click.option("--address", required=True, help="Node base address, e.g. http://127.0.0.1:8101")
@click.option("--kind", required=True,
              type=click.Choice(["db_down", "db_up", "db_slow", "set_resources", "clear_resources"]))
@click.option("--param", default=None, help="JSON value for the fault parameter.")
@click.option("--target", default=None, help="Node id (defaults to the served node).")
def fault(address, kind, param, target):
    """Inject a simulated fault into a served node."""
    body = {"target": target, "kind": kind, "param": json.loads(param) if param else None}
    try:
        response = httpx.post(f"{address}/sim/fault", json=body, timeout=5.0)
    except httpx.HTTPError as exc:
        raise click.ClickException(f"node unreachable: {exc}") from exc
    if response.status_code != 200:
        raise click.ClickException(f"{response.status_code}: {response.text}")
    click.echo(response.text)


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--base-port", type=int, default=8100, show_default=True)
def serve(scenario_path, base_port):
    """Serve the scenario's mesh over HTTP until interrupted."""
    from .clock import RealClock
    from .scenarios import build_scenario_mesh
    from .service.app import start_node_servers
    from .transport import HttpTransport

    try:
        spec = load_scenario(scenario_path)
    except AdaptiFlowError as exc:
        raise click.ClickException(str(exc)) from exc
    clock = RealClock(0)
    mesh = build_scenario_mesh(spec, clock)
    servers = start_node_servers(spec, mesh, base_port=base_port)
    transport = HttpTransport()
    addresses = {s.node.node_id: s.address for s in servers}
    for node in mesh.values():
        node.transport = transport
        node.address = addresses[node.node_id]
        node.peers.clear()
        for other_id, addr in addresses.items():
            if other_id != node.node_id:
                node.add_peer(other_id, addr)
    for server in servers:
        click.echo(f"{server.node.node_id}: {server.address}")
    click.echo("serving; Ctrl-C to stop")
    import time

    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        for server in servers:
            server.stop()
        transport.close()


if __name__ == "__main__":
    main()
