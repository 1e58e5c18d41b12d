"""Read-only HTTP API over precomputed run artifacts.

The server loads the run directory once at startup and answers every
request from immutable in-memory state, so concurrent reads are safe and
no request can mutate anything. Malformed requests get a 400, missing
resources a 404; handler faults are mapped to 400 rather than 500.

Endpoints:
  GET /api/meta                     run metadata
  GET /api/query?r=&c=              destination distribution at a point
  GET /api/cells?a=[&format=png]    agreement cells (JSON runs or PNG)
  GET /api/survival?bins=k          quantized survival PNG
  GET /api/maps/probabilistic       blended probability PNG
  GET /api/maps/survival            survival heat PNG
  GET /api/boundaries?kind=...      polyline JSON (expected|meanfield|truth)
  GET /...                          static UI files, if a bundle is configured
"""

from __future__ import annotations

import json
import mimetypes
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import formats, render
from .pipeline import DataError, _load_pmap
from .summary import ProbabilisticMap, agreement_cells, quantize, query

__all__ = ["Artifacts", "make_server", "serve"]


@dataclass(frozen=True)
class Artifacts:
    """Immutable snapshot of one computed run."""

    pmap: ProbabilisticMap
    survival: np.ndarray
    survival_meta: dict
    boundaries: dict
    summary: dict
    thresholds: tuple[float, ...]

    @classmethod
    def load(cls, directory: str | Path) -> "Artifacts":
        directory = Path(directory)
        pmap = _load_pmap(directory)
        svm_path = directory / "smap.svm1"
        if not svm_path.exists():
            raise DataError(f"no survival map at {svm_path}")
        _, _, survival = formats.load_survival_values(svm_path.read_bytes())
        survival_meta = json.loads((directory / "smap_meta.json").read_text()) if (directory / "smap_meta.json").exists() else {}
        boundaries = json.loads((directory / "boundaries.json").read_text()) if (directory / "boundaries.json").exists() else {}
        summary = json.loads((directory / "run_summary.json").read_text()) if (directory / "run_summary.json").exists() else {}
        thresholds: tuple[float, ...] = (0.95, 0.8, 0.6)
        anchors_path = directory / "anchors.json"
        if anchors_path.exists():
            doc = json.loads(anchors_path.read_text())
            thresholds = tuple(doc.get("thresholds", thresholds))
        return cls(pmap, survival, survival_meta, boundaries, summary, thresholds)

    def meta(self) -> dict:
        p = self.pmap
        return {
            "width": p.width,
            "height": p.height,
            "n": p.n,
            "l": p.l,
            "labels": list(range(p.l)),
            "anchors": [[a // p.width, a % p.width] for a in p.anchors],
            "palette": [list(c) for c in render.CATEGORICAL16.colors[: p.l]],
            "thresholds": list(self.thresholds),
            "boundary_kinds": sorted(self.boundaries.keys()),
            "survival_normalization": self.survival_meta.get("normalization", "none"),
        }


def _rle(labels: np.ndarray) -> list[list[int]]:
    """Row-major run-length encoding of a label image: [start, length, label]."""
    flat = np.asarray(labels).reshape(-1)
    if flat.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(flat) != 0)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [flat.size - 1]))
    return [[int(s), int(e - s + 1), int(flat[s])] for s, e in zip(starts, ends)]


class _Handler(BaseHTTPRequestHandler):
    artifacts: Artifacts
    ui_dir: Path | None = None

    # Quiet request logging; the server is a local viewer backend.
    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def do_GET(self):  # noqa: N802 - stdlib naming
        try:
            self._route()
        except BrokenPipeError:
            pass
        except Exception as exc:  # malformed input must not become a 500
            try:
                self._json(400, {"error": str(exc)})
            except Exception:
                pass

    def _route(self):
        url = urlparse(self.path)
        params = parse_qs(url.query)
        path = url.path
        art = self.artifacts
        if path == "/api/meta":
            self._json(200, art.meta())
        elif path == "/api/query":
            self._query(art, params)
        elif path == "/api/cells":
            self._cells(art, params)
        elif path == "/api/survival":
            self._survival(art, params)
        elif path == "/api/maps/probabilistic":
            p = art.pmap
            self._png(render.blend(p.dist, render.CATEGORICAL16, p.width, p.height))
        elif path == "/api/maps/survival":
            p = art.pmap
            self._png(render.heatmap(art.survival, p.width, p.height))
        elif path == "/api/boundaries":
            kind = self._one(params, "kind", "expected")
            if kind not in art.boundaries:
                self._json(404, {"error": f"no boundaries of kind {kind!r}"})
                return
            self._json(200, {"kind": kind, "polylines": art.boundaries[kind]})
        elif path.startswith("/api/"):
            self._json(404, {"error": f"unknown endpoint {path}"})
        else:
            self._static(path)

    def _query(self, art: Artifacts, params):
        r = self._int(params, "r")
        c = self._int(params, "c")
        if r is None or c is None:
            self._json(400, {"error": "query needs integer r and c"})
            return
        if not (0 <= r < art.pmap.height and 0 <= c < art.pmap.width):
            self._json(400, {"error": f"({r}, {c}) outside {art.pmap.height}x{art.pmap.width} grid"})
            return
        labels, probs = query(art.pmap, r, c)
        self._json(200, {"r": r, "c": c, "labels": labels, "probabilities": probs})

    def _cells(self, art: Artifacts, params):
        try:
            a = float(self._one(params, "a", ""))
        except ValueError:
            self._json(400, {"error": "cells needs a numeric agreement threshold a"})
            return
        if not (0.5 < a <= 1.0):
            self._json(400, {"error": f"threshold {a} outside (0.5, 1]"})
            return
        labels = agreement_cells(art.pmap, a)
        if self._one(params, "format", "json") == "png":
            self._png(render.categorical(labels, render.CATEGORICAL16, art.pmap.width, art.pmap.height))
        else:
            self._json(
                200,
                {
                    "width": art.pmap.width,
                    "height": art.pmap.height,
                    "a": a,
                    "assigned": int((labels >= 0).sum()),
                    "rle": _rle(labels),
                },
            )

    def _survival(self, art: Artifacts, params):
        bins = self._int(params, "bins")
        if bins is None or bins < 1:
            self._json(400, {"error": "survival needs a positive integer bins"})
            return
        b = quantize(art.survival, bins)
        palette = render.CATEGORICAL16
        self._png(render.categorical(b % len(palette), palette, art.pmap.width, art.pmap.height))

    def _static(self, path: str):
        if self.ui_dir is None:
            self._json(404, {"error": "no UI bundle configured"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._json(404, {"error": f"no such file {path}"})
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    @staticmethod
    def _one(params, key, default=None):
        vals = params.get(key)
        return vals[0] if vals else default

    def _int(self, params, key):
        v = self._one(params, key)
        if v is None:
            return None
        try:
            return int(v)
        except ValueError:
            return None

    def _json(self, status: int, doc: dict):
        body = (json.dumps(doc, sort_keys=True) + "\n").encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _png(self, image: np.ndarray):
        body = render.encode_png(image)
        self.send_response(200)
        self.send_header("Content-Type", "image/png")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(directory: str | Path, host: str = "127.0.0.1", port: int = 0,
                ui_dir: str | Path | None = None) -> ThreadingHTTPServer:
    """Build a server over a computed run directory (port 0 picks a free one)."""
    artifacts = Artifacts.load(directory)
    handler = type("BoundHandler", (_Handler,), {
        "artifacts": artifacts,
        "ui_dir": Path(ui_dir) if ui_dir else None,
    })
    return ThreadingHTTPServer((host, port), handler)


def serve(directory: str | Path, host: str = "127.0.0.1", port: int = 8765,
          ui_dir: str | Path | None = None) -> None:
    server = make_server(directory, host=host, port=port, ui_dir=ui_dir)
    print(f"serving {directory} on http://{host}:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
