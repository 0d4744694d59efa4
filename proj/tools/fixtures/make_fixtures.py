#!/usr/bin/env python3
"""Regenerates the bundled fixture sets under fixtures/."""
import hashlib
import json
import os
from datetime import datetime, timedelta, timezone

ROOT = os.path.join(os.path.dirname(__file__), "..", "..", "fixtures")
T0 = datetime(2020, 2, 1, tzinfo=timezone.utc)
SHIM = "instrumentFunction@moz-extension://3f2a9c1e/content.js:12:17"


def ts(ms):
    t = T0 + timedelta(milliseconds=ms)
    return t.strftime("%Y-%m-%dT%H:%M:%S.") + f"{t.microsecond // 1000:03d}Z"


def write(name, rows, fixture):
    path = os.path.join(ROOT, fixture, name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n")


def body(url, content):
    return {"url": url, "sha256": hashlib.sha256(content.encode()).hexdigest(), "content": content}


class Events:
    def __init__(self, visit, top):
        self.visit, self.top, self.rows, self.clock = visit, top, [], 0

    def add(self, symbol, op, stack=None, script_url=None, value=None, args=None):
        self.clock += 7
        r = {"visit_id": self.visit, "top_level_url": self.top, "symbol": symbol, "operation": op}
        if value is not None:
            r["value"] = value
        if args is not None:
            r["arguments"] = args
        if stack is not None:
            r["stack_raw"] = stack
        if script_url is not None:
            r["script_url"] = script_url
        r["time_stamp"] = ts(self.clock)
        self.rows.append(r)


def font_probe(ev, frame):
    for i in range(50):
        ev.add("CanvasRenderingContext2D.font", "set", stack=f"{SHIM}\n{frame}\n",
               value=f"72px 'probe-font-{i:02d}', monospace")
        ev.add("CanvasRenderingContext2D.measureText", "call", stack=f"{SHIM}\n{frame}\n",
               args=["mmmmmmmmlli"])


def masked():
    top = "https://news.example/"
    ev = Events(1, top)
    for _ in range(3):
        ev.add("Navigator.userAgent", "get", stack=f"{SHIM}\ninit@https://news.example/app.js:4:9\n")
    font_probe(ev, "measure@dna.min.js:2:14")
    ev.add("HTMLCanvasElement.toDataURL", "call", stack=f"{SHIM}\nfinish@dna.min.js:2:88\n")
    ev.add("Document.cookie", "get", script_url="")
    ev.add("Window.name", "get", script_url="(program):2")
    write("js_events.jsonl", ev.rows, "masked")

    reqs = [
        (top, "GET", "main_frame"),
        ("https://news.example/app.js", "GET", "script"),
        ("https://t.example/px.js", "GET", "script"),
        ("https://t.example/collect?id=42", "POST", "xmlhttprequest"),
    ]
    write("requests.jsonl", [{"visit_id": 1, "url": u, "method": m, "resource_type": t,
                              "time_stamp": ts(i)} for i, (u, m, t) in enumerate(reqs)], "masked")

    app = "function init(){ return navigator.userAgent; }\ninit();\n"
    px = ("var s = '//# sourceURL=decoy.js';\n"
          "function measure(c){for(var i=0;i<50;i++){c.font=fonts[i];c.measureText('mmmmmmmmlli');}}\n"
          "//# sourceURL=dna.min.js\n")
    write("script_bodies.jsonl", [body("https://news.example/app.js", app),
                                  body("https://t.example/px.js", px)], "masked")
    expected = {
        "exit_code": 2,
        "counts": {"MATCHED": 1, "UNMATCHED_URL": 0, "OPAQUE_LABEL_SUSPECT": 1, "INLINE": 1, "INTERNAL": 1},
        "findings": [{"visit_id": 1, "label": "dna.min.js", "corroboration": "PRAGMA_EXACT",
                      "candidate_true_origins": ["https://t.example/px.js"]}],
    }
    with open(os.path.join(ROOT, "masked", "expected.json"), "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


def clean():
    top = "https://shop.example/"
    ev = Events(3, top)
    for _ in range(2):
        ev.add("Navigator.userAgent", "get", stack=f"{SHIM}\nboot@https://shop.example/app.js:1:20\n")
    font_probe(ev, "measure@https://cdn.fp.example/fp.js?v=3:10:5")
    ev.add("CanvasRenderingContext2D.fillText", "call",
           stack=f"Error\n    at logCall (chrome-extension://abcdefgh/content.js:40:9)\n"
                 f"    at draw (https://CDN.fp.example:443/fp.js?v=3:22:7)\n",
           args=["Cwm fjordbank glyphs vext quiz", "2", "15"])
    ev.add("HTMLCanvasElement.toDataURL", "call", script_url="https://cdn.fp.example/fp.js?v=3#x")
    write("js_events.jsonl", ev.rows, "clean")
    reqs = [(top, "main_frame"), ("https://shop.example/app.js", "script"),
            ("https://cdn.fp.example/fp.js?v=3", "script")]
    write("requests.jsonl", [{"visit_id": 3, "url": u, "method": "GET", "resource_type": t,
                              "time_stamp": ts(i)} for i, (u, t) in enumerate(reqs)], "clean")
    write("script_bodies.jsonl", [body("https://cdn.fp.example/fp.js?v=3",
                                       "function draw(c){c.fillText('Cwm fjordbank glyphs vext quiz',2,15);}\n"
                                       "//# sourceMappingURL=fp.js.map\n")], "clean")
    expected = {
        "exit_code": 0,
        "counts": {"MATCHED": 2, "UNMATCHED_URL": 0, "OPAQUE_LABEL_SUSPECT": 0, "INLINE": 0, "INTERNAL": 0},
        "findings": [],
    }
    with open(os.path.join(ROOT, "clean", "expected.json"), "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    masked()
    clean()
