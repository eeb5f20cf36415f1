"""Scenario files, trace/metrics writers and SVG plots."""

from __future__ import annotations

import copy
import json
import math
import xml.etree.ElementTree as ET
from dataclasses import asdict, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .core import IpfParams, KinematicLimits, Knowledge, Workspace
from .scenario import ObstacleSpec, Scenario, ValidationError
from .spso import PsoParams


class ParseError(ValueError):
    """Malformed scenario document."""


_SECTIONS = {
    "ipf": {f.name for f in fields(IpfParams)},
    "pso": {f.name for f in fields(PsoParams)} - {"seed"},
    "limits": {f.name for f in fields(KinematicLimits)},
    "robot": {"radius"},
    "sim": {"dt", "max_epochs", "one_sided_penalty"},
    "workspace": {"min", "max"},
}
_TOP = {"name", "workspace", "start", "goal", "goal_tolerance", "robot", "limits", "obstacles", "ipf", "pso", "sim", "seed"}
_REQUIRED = ("workspace", "start", "goal")
_OBSTACLE_KEYS = {"position", "radius", "motion", "knowledge"}
_MOTION_KEYS = {"static": {"type"}, "velocity": {"type", "velocity"}, "waypoints": {"type", "points", "speed"}}

BUILTIN_SCENARIOS = ("bench-empty", "bench-static-3", "bench-static-5", "bench-static-8", "bench-dynamic-1")


def _no_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ParseError(f"duplicate field {key!r}")
        out[key] = value
    return out


def parse_document(text: str, source: str = "<string>") -> dict:
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except ParseError as exc:
        raise ParseError(f"{source}: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    return doc


def resolve_scenario_path(name_or_path: str | Path) -> Path:
    """Accept a file path or the name of a bundled benchmark scenario."""
    path = Path(name_or_path)
    if path.exists() or str(name_or_path) not in BUILTIN_SCENARIOS:
        return path
    return Path(str(resources.files("spso_ipf") / "scenarios" / f"{name_or_path}.json"))


def apply_overrides(doc: dict, overrides: Mapping[str, Any]) -> dict:
    """Apply ``section.key=value`` overrides to a raw scenario document."""
    doc = copy.deepcopy(doc)
    for key, value in overrides.items():
        parts = key.split(".")
        if len(parts) == 1 and parts[0] in {"goal_tolerance", "seed", "start", "goal", "name"}:
            doc[parts[0]] = value
        elif len(parts) == 2 and parts[1] in _SECTIONS.get(parts[0], ()):
            section = doc.setdefault(parts[0], {})
            if not isinstance(section, dict):
                raise ParseError(f"section {parts[0]!r} must be an object")
            section[parts[1]] = value
        else:
            raise ValidationError(f"unknown override key {key!r}")
    return doc


def parse_override(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ValidationError(f"override {item!r} is not key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _vec(value, where: str):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ParseError(f"{where}: expected [x, y], got {value!r}")
    if not all(math.isfinite(v) for v in value):
        raise ParseError(f"{where}: non-finite coordinate")
    return np.array(value, dtype=float)


def _num(value, where: str, integer: bool = False):
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if not ok or isinstance(value, bool):
        raise ParseError(f"{where}: expected {'integer' if integer else 'number'}, got {value!r}")
    return value


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ParseError(f"{name}: expected an object")
    unknown = set(sec) - _SECTIONS[name]
    if unknown:
        raise ParseError(f"{name}: unknown field(s) {sorted(unknown)}")
    return sec


def _obstacle(raw: Any, i: int) -> ObstacleSpec:
    where = f"obstacles[{i}]"
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = set(raw) - _OBSTACLE_KEYS
    if unknown:
        raise ParseError(f"{where}: unknown field(s) {sorted(unknown)}")
    for key in ("position", "radius"):
        if key not in raw:
            raise ParseError(f"{where}: missing {key!r}")
    motion = raw.get("motion", {"type": "static"})
    if not isinstance(motion, dict) or motion.get("type") not in _MOTION_KEYS:
        raise ParseError(f"{where}.motion: type must be one of {sorted(_MOTION_KEYS)}")
    extra = set(motion) - _MOTION_KEYS[motion["type"]]
    if extra:
        raise ParseError(f"{where}.motion: unknown field(s) {sorted(extra)}")

    kwargs: dict[str, Any] = {
        "position": _vec(raw["position"], f"{where}.position"),
        "radius": float(_num(raw["radius"], f"{where}.radius")),
        "motion": motion["type"],
    }
    if motion["type"] == "velocity":
        kwargs["velocity"] = _vec(motion.get("velocity"), f"{where}.motion.velocity")
    elif motion["type"] == "waypoints":
        points = motion.get("points")
        if not isinstance(points, list) or not points:
            raise ParseError(f"{where}.motion.points: expected a non-empty list")
        kwargs["waypoints"] = np.array([_vec(p, f"{where}.motion.points[{j}]") for j, p in enumerate(points)])
        kwargs["speed"] = float(_num(motion.get("speed"), f"{where}.motion.speed"))

    knowledge = raw.get("knowledge", "exact")
    if knowledge in ("exact", "unknown"):
        kwargs["knowledge"] = Knowledge(knowledge)
    elif isinstance(knowledge, dict) and set(knowledge) == {"max_speed"}:
        kwargs["knowledge"] = Knowledge.MAX_SPEED
        kwargs["max_speed"] = float(_num(knowledge["max_speed"], f"{where}.knowledge.max_speed"))
    else:
        raise ParseError(f"{where}.knowledge: expected \"exact\", \"unknown\" or {{\"max_speed\": v}}")
    return ObstacleSpec(**kwargs)


def scenario_from_dict(doc: dict) -> Scenario:
    unknown = set(doc) - _TOP
    if unknown:
        raise ParseError(f"unknown top-level field(s) {sorted(unknown)}")
    for key in _REQUIRED:
        if key not in doc:
            raise ParseError(f"missing required field {key!r}")

    ws = _section(doc, "workspace")
    if set(ws) != {"min", "max"}:
        raise ParseError("workspace: needs both 'min' and 'max'")
    lo, hi = _vec(ws["min"], "workspace.min"), _vec(ws["max"], "workspace.max")

    robot = _section(doc, "robot")
    sim = _section(doc, "sim")
    ipf = {k: _num(v, f"ipf.{k}") for k, v in _section(doc, "ipf").items()}
    limits = {k: _num(v, f"limits.{k}") for k, v in _section(doc, "limits").items()}
    pso = dict(_section(doc, "pso"))
    for k in ("num_particles", "max_iterations"):
        if k in pso:
            _num(pso[k], f"pso.{k}", integer=True)
    if "seed" in doc:
        pso["seed"] = _num(doc["seed"], "seed", integer=True)

    obstacles = doc.get("obstacles", [])
    if not isinstance(obstacles, list):
        raise ParseError("obstacles: expected a list")

    kwargs: dict[str, Any] = {}
    if "goal_tolerance" in doc:
        kwargs["goal_tolerance"] = float(_num(doc["goal_tolerance"], "goal_tolerance"))
    if "radius" in robot:
        kwargs["robot_radius"] = float(_num(robot["radius"], "robot.radius"))
    if "dt" in sim:
        kwargs["dt"] = float(_num(sim["dt"], "sim.dt"))
    if "max_epochs" in sim:
        kwargs["max_epochs"] = _num(sim["max_epochs"], "sim.max_epochs", integer=True)
    if "one_sided_penalty" in sim:
        if not isinstance(sim["one_sided_penalty"], bool):
            raise ParseError("sim.one_sided_penalty: expected true/false")
        kwargs["one_sided_penalty"] = sim["one_sided_penalty"]
    try:
        return Scenario(
            workspace=Workspace(lo[0], lo[1], hi[0], hi[1]),
            start=_vec(doc["start"], "start"),
            goal=_vec(doc["goal"], "goal"),
            limits=KinematicLimits(**limits),
            obstacles=[_obstacle(o, i) for i, o in enumerate(obstacles)],
            ipf=IpfParams(**ipf),
            pso=PsoParams(**pso),
            name=str(doc.get("name", "")),
            **kwargs,
        )
    except (ParseError, ValidationError):
        raise
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc)) from None


def load_scenario(path: str | Path, overrides: Mapping[str, Any] | None = None) -> Scenario:
    """Read, default and validate a scenario file (path or bundled benchmark name)."""
    path = resolve_scenario_path(path)
    text = Path(path).read_text()
    doc = parse_document(text, str(path))
    if overrides:
        doc = apply_overrides(doc, overrides)
    scenario = scenario_from_dict(doc)
    if not scenario.name:
        scenario = replace(scenario, name=Path(path).stem)
    return scenario


def scenario_to_dict(sc: Scenario) -> dict:
    """Inverse of :func:`scenario_from_dict` with every default written out."""

    def knowledge(o: ObstacleSpec):
        if o.knowledge is Knowledge.MAX_SPEED:
            return {"max_speed": o.max_speed}
        return o.knowledge.value

    def motion(o: ObstacleSpec):
        if o.motion == "velocity":
            return {"type": "velocity", "velocity": o.velocity.tolist()}
        if o.motion == "waypoints":
            return {"type": "waypoints", "points": o.waypoints.tolist(), "speed": o.speed}
        return {"type": "static"}

    pso = asdict(sc.pso)
    seed = pso.pop("seed")
    return {
        "name": sc.name,
        "workspace": {"min": sc.workspace.lower.tolist(), "max": sc.workspace.upper.tolist()},
        "start": sc.start.tolist(),
        "goal": sc.goal.tolist(),
        "goal_tolerance": sc.goal_tolerance,
        "robot": {"radius": sc.robot_radius},
        "limits": asdict(sc.limits),
        "obstacles": [
            {"position": o.position.tolist(), "radius": o.radius, "motion": motion(o), "knowledge": knowledge(o)}
            for o in sc.obstacles
        ],
        "ipf": asdict(sc.ipf),
        "pso": pso,
        "sim": {"dt": sc.dt, "max_epochs": sc.max_epochs, "one_sided_penalty": sc.one_sided_penalty},
        "seed": seed,
    }


# -- outputs -----------------------------------------------------------------

TRACE_FIELDS = ("epoch", "x", "y", "heading", "gbest_fitness")
METRIC_COLUMNS = ("length", "smoothness", "max_turn_rate", "min_clearance", "epochs", "success")
COMPARISON_FIELDS = ("algorithm", "seed", "termination") + METRIC_COLUMNS


def fmt(value) -> str:
    """Locale-free number formatting with 9 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def trace_csv(trace, n_obstacles: int | None = None) -> str:
    if n_obstacles is None:
        n_obstacles = len(trace.records[0].obstacle_positions) if trace.records else 0
    header = list(TRACE_FIELDS)
    for i in range(n_obstacles):
        header += [f"obs{i}_x", f"obs{i}_y"]
    lines = [",".join(header)]
    for rec in trace.records:
        row = [rec.epoch, rec.robot.position[0], rec.robot.position[1], rec.robot.heading, rec.fitness]
        row += list(np.asarray(rec.obstacle_positions, dtype=float).ravel())
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def comparison_csv(rows: Sequence[dict]) -> str:
    lines = [",".join(COMPARISON_FIELDS)]
    for row in rows:
        lines.append(",".join(fmt(row[k]) if k in row and not isinstance(row[k], str) else str(row.get(k, ""))
                              for k in COMPARISON_FIELDS))
    return "\n".join(lines) + "\n"


def _json_safe(value):
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return _json_safe(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def dumps_json(doc) -> str:
    """Strict JSON: non-finite floats become ``null``."""
    return json.dumps(_json_safe(doc), indent=2, allow_nan=False) + "\n"


def metrics_document(trace, metrics, scenario: Scenario, overrides: Mapping[str, Any] | None = None) -> dict:
    doc = {"algorithm": trace.algorithm.value, "seed": trace.seed, "termination": trace.termination.value}
    doc.update(asdict(metrics))
    doc["config"] = {"scenario": scenario_to_dict(scenario), "overrides": dict(overrides or {})}
    return doc


# -- SVG ---------------------------------------------------------------------

SVG_WIDTH = 800.0
SVG_MARGIN = 20.0
PALETTE = ("#e6a700", "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


class _Canvas:
    """Workspace-to-viewBox mapping with the y axis pointing up."""

    def __init__(self, workspace: Workspace):
        self.ws = workspace
        w = workspace.xmax - workspace.xmin
        h = workspace.ymax - workspace.ymin
        self.scale = (SVG_WIDTH - 2 * SVG_MARGIN) / w
        self.height = h * self.scale + 2 * SVG_MARGIN
        self.root = ET.Element("svg", {
            "xmlns": "http://www.w3.org/2000/svg",
            "viewBox": f"0 0 {_n(SVG_WIDTH)} {_n(self.height)}",
            "width": _n(SVG_WIDTH), "height": _n(self.height),
        })

    def xy(self, p):
        x = SVG_MARGIN + (p[0] - self.ws.xmin) * self.scale
        y = self.height - SVG_MARGIN - (p[1] - self.ws.ymin) * self.scale
        return x, y

    def add(self, tag, **attrs):
        return ET.SubElement(self.root, tag, {k.rstrip("_").replace("_", "-"): str(v) for k, v in attrs.items()})

    def polyline(self, points, **attrs):
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in (self.xy(p) for p in points))
        return self.add("polyline", points=pts, fill="none", **attrs)

    def star(self, center, r, **attrs):
        cx, cy = self.xy(center)
        pts = []
        for k in range(10):
            rad = r if k % 2 == 0 else 0.4 * r
            a = -math.pi / 2 + k * math.pi / 5
            pts.append(f"{_n(cx + rad * math.cos(a))},{_n(cy + rad * math.sin(a))}")
        return self.add("polygon", points=" ".join(pts), **attrs)

    def tostring(self) -> str:
        ET.indent(self.root)
        return ET.tostring(self.root, encoding="unicode") + "\n"


def _n(v: float) -> str:
    return format(round(float(v), 2), "g") if abs(v) < 1e6 else format(float(v), ".6g")


def _scene(canvas: _Canvas, scenario: Scenario, trace) -> None:
    ws = scenario.workspace
    x0, y0 = canvas.xy((ws.xmin, ws.ymax))
    canvas.add("rect", x=_n(x0), y=_n(y0), width=_n((ws.xmax - ws.xmin) * canvas.scale),
               height=_n((ws.ymax - ws.ymin) * canvas.scale), fill="#fbfbf7", stroke="#333333")
    radii = [o.radius for o in scenario.obstacles]
    track = np.array([r.obstacle_positions for r in trace.records]) if trace is not None else None
    for i, r in enumerate(radii):
        if track is not None and len(track) > 1 and np.any(track[:, i] != track[0, i]):
            canvas.polyline(track[:, i], stroke="#f3dfa2", stroke_width=_n(2 * r * canvas.scale),
                            stroke_linecap="round", stroke_linejoin="round", opacity="0.6")
        center = track[-1, i] if track is not None else scenario.obstacles[i].position
        cx, cy = canvas.xy(center)
        canvas.add("circle", cx=_n(cx), cy=_n(cy), r=_n(r * canvas.scale), fill="#d9534f", stroke="#8b1a1a")
    sx, sy = canvas.xy(scenario.start)
    canvas.add("circle", cx=_n(sx), cy=_n(sy), r="6", fill="#2c7be5", stroke="#000000")
    canvas.star(scenario.goal, 12, fill="#ffd700", stroke="#000000")


def path_svg(trace, scenario: Scenario) -> str:
    canvas = _Canvas(scenario.workspace)
    _scene(canvas, scenario, trace)
    canvas.polyline(trace.positions, stroke=PALETTE[0], stroke_width="3")
    return canvas.tostring()


def overlay_svg(traces: Mapping[str, Any], scenario: Scenario) -> str:
    """One path per label over the scene of the first trace."""
    canvas = _Canvas(scenario.workspace)
    first = next(iter(traces.values()), None)
    _scene(canvas, scenario, first)
    for k, (label, trace) in enumerate(traces.items()):
        color = PALETTE[k % len(PALETTE)]
        canvas.polyline(trace.positions, stroke=color, stroke_width="3")
        text = canvas.add("text", x=_n(SVG_MARGIN + 10), y=_n(SVG_MARGIN + 20 + 18 * k), fill=color,
                          font_size="14", font_family="sans-serif")
        text.text = label
    return canvas.tostring()


def write_outputs(out_dir: str | Path, files: Mapping[str, str]) -> None:
    """Write every ``name -> text`` pair with LF line endings."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        with open(out / name, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
