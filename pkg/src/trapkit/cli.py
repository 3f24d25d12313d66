"""Scenario-driven command line front end.

    trapkit run <scenario.json> [--out PATH] [--format json|csv]
    trapkit list-ops [--json]
    trapkit --version

A scenario is a JSON document (schema shipped with the package) declaring
named functions, cost models, and sets, plus an ordered task list; each
task names an operation and its argument bindings.  Reports echo the
scenario hash and are deterministic apart from wall-time fields.  Exit
codes: 0 all tasks executed (whatever their verdicts), 1 scenario error,
2 internal error.
"""

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from importlib import resources

import jsonschema

import trapkit
from trapkit.registry import BindingError, OPS, ScenarioEnv, bind_and_call, list_operations, to_jsonable

REPORT_FORMAT = "trapkit-report-v1"


def _load_schema() -> dict:
    ref = resources.files("trapkit.schema").joinpath("scenario-v1.schema.json")
    return json.loads(ref.read_text())


def run_scenario(path: str, out: str | None = None, fmt: str = "json") -> int:
    if fmt not in ("json", "csv"):
        print(f"error: unknown format {fmt!r}", file=sys.stderr)
        return 1
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return 1
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(
            f"error: scenario is not valid JSON (line {exc.lineno}, column {exc.colno}): "
            f"{exc.msg}",
            file=sys.stderr,
        )
        return 1
    try:
        jsonschema.validate(doc, _load_schema())
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        print(f"error: scenario schema violation at {loc}: {exc.message}", file=sys.stderr)
        return 1

    try:
        env = ScenarioEnv.from_scenario(doc)
    except ValueError as exc:
        print(f"error: scenario definitions: {exc}", file=sys.stderr)
        return 1

    # Bindings are checked up front so a misspelled op or parameter fails
    # the whole scenario instead of producing a partial report.
    for task in doc["tasks"]:
        if task["op"] not in OPS:
            print(f"error: task {task['id']!r}: unknown operation {task['op']!r}",
                  file=sys.stderr)
            return 1
        known = {p.name for p in OPS[task["op"]].params}
        required = {p.name for p in OPS[task["op"]].params if p.required}
        given = set(task.get("args", {}))
        for key in given - known:
            print(f"error: task {task['id']!r}: operation {task['op']!r} has no "
                  f"parameter {key!r}", file=sys.stderr)
            return 1
        for key in required - given:
            print(f"error: task {task['id']!r}: missing parameter {key!r}",
                  file=sys.stderr)
            return 1

    records = []
    for task in doc["tasks"]:
        t0 = time.perf_counter()
        record = {
            "id": task["id"],
            "op": task["op"],
            "args": task.get("args", {}),
        }
        try:
            result = bind_and_call(task["op"], task.get("args", {}), env)
            record["status"] = "ok"
            record["result"] = to_jsonable(result)
        except BindingError as exc:
            print(f"error: task {task['id']!r}: {exc}", file=sys.stderr)
            return 1
        except (ValueError, ArithmeticError) as exc:
            record["status"] = "error"
            record["error"] = f"{type(exc).__name__}: {exc}"
        record["wall_time_s"] = time.perf_counter() - t0
        records.append(record)

    report = {
        "format": REPORT_FORMAT,
        "toolkit_version": trapkit.__version__,
        "backend": trapkit.active_backend(),
        "scenario": {
            "name": doc["name"],
            "sha256": hashlib.sha256(raw).hexdigest(),
        },
        "seed": doc.get("seed", 0),
        "tasks": records,
    }

    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    else:
        text = _to_csv(report)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
    return 0


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, "" if value is None else json.dumps(value)))


def _to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["task_id", "op", "status", "field", "value"])
    writer.writerow(["", "", "", "scenario.name", report["scenario"]["name"]])
    writer.writerow(["", "", "", "scenario.sha256", report["scenario"]["sha256"]])
    writer.writerow(["", "", "", "toolkit_version", report["toolkit_version"]])
    for rec in report["tasks"]:
        payload = rec.get("result") if rec["status"] == "ok" else rec.get("error")
        rows: list = []
        _flatten("", payload, rows)
        if not rows:
            rows = [("result", "")]
        for fieldname, value in rows:
            writer.writerow([rec["id"], rec["op"], rec["status"],
                             fieldname or "result", value])
        writer.writerow([rec["id"], rec["op"], rec["status"], "wall_time_s",
                         json.dumps(rec["wall_time_s"])])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="trapkit",
        description="worthwhile-move calculus and stationary-trap checks",
    )
    parser.add_argument("--version", action="version",
                        version=f"trapkit {trapkit.__version__}")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--out", default=None, help="report path (default: stdout)")
    p_run.add_argument("--format", default="json", choices=["json", "csv"])

    p_list = sub.add_parser("list-ops", help="catalog of dispatchable operations")
    p_list.add_argument("--json", action="store_true", dest="as_json")

    args = parser.parse_args(argv)
    if args.command == "run":
        try:
            return run_scenario(args.scenario, out=args.out, fmt=args.format)
        except Exception as exc:  # internal error
            print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
    if args.command == "list-ops":
        catalog = list_operations()
        if args.as_json:
            print(json.dumps(catalog, sort_keys=True, indent=2))
        else:
            for entry in catalog:
                sig = ", ".join(
                    p["name"] + ("" if p["required"] else "?") for p in entry["params"]
                )
                print(f"{entry['op']}({sig})")
                print(f"    {entry['summary']}")
        return 0
    parser.print_help()
    return 0


if __name__ == "__main__":
    sys.exit(main())
