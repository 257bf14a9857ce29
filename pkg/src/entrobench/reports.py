"""CSV tables and standalone SVG charts for workbench reports.

Every emitter returns a deterministic string: fixed column order, "\n" line
endings, and fixed-precision coordinates, so identical inputs produce
byte-identical files.
"""

import csv
import io
from fractions import Fraction

from . import compacta
from .interval_maps import entropy_estimate, lap_count
from .rationals import frac, frac_str
from .shifts import max_independence_density


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def gamma_trace_rows(trace) -> list:
    """(step, pair_count, is_fixed) per iterate; only the last is fixed."""
    last = len(trace) - 1
    return [(i, rel.pair_count(), i == last) for i, rel in enumerate(trace)]


def gamma_trace_csv(trace) -> str:
    rows = [(s, c, "true" if f else "false") for s, c, f in gamma_trace_rows(trace)]
    return _csv(("step", "pair_count", "is_fixed"), rows)


def density_profile_rows(s, U, V, n: int) -> list:
    """(l, max_size, density) for every window length l = 1..n."""
    out = []
    for l in range(1, n + 1):
        d = max_independence_density(s, U, V, l)
        out.append((l, len(d.positions), frac_str(d.density)))
    return out


def density_profile_csv(s, U, V, n: int) -> str:
    return _csv(("l", "max_size", "density"), density_profile_rows(s, U, V, n))


def shadowing_csv(entries) -> str:
    """Rows of (eps, delta, p, verdict) with exact rational radii."""
    rows = [
        (frac_str(frac(eps)), frac_str(frac(delta)), int(p), str(verdict))
        for eps, delta, p, verdict in entries
    ]
    return _csv(("eps", "delta", "p", "verdict"), rows)


def entropy_csv(f, n_max: int) -> str:
    rows = []
    for n in range(1, n_max + 1):
        laps = lap_count(f, n)
        rows.append((n, laps, repr(entropy_estimate(f, n))))
    return _csv(("n", "laps", "estimate"), rows)


# ---------------------------------------------------------------------------
# SVG charts
# ---------------------------------------------------------------------------

_W = 640
_MARGIN = 40


def _pos(x) -> str:
    return f"{float(x):.2f}"


def _svg(height: int, body: list) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
        f'height="{height}" viewBox="0 0 {_W} {height}">'
    )
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def _text(x, y, s, anchor="start") -> str:
    return (
        f'<text x="{_pos(x)}" y="{_pos(y)}" font-family="monospace" '
        f'font-size="12" text-anchor="{anchor}">{s}</text>'
    )


def _rect(x, y, w, h, fill) -> str:
    return (
        f'<rect x="{_pos(x)}" y="{_pos(y)}" width="{_pos(w)}" '
        f'height="{_pos(h)}" fill="{fill}"/>'
    )


def derivative_cascade_svg(s, gaps_per_level: int = 12) -> str:
    """One bar per derivative level; white cut-outs mark the widest gaps."""
    levels = [s]
    while not compacta.is_empty(levels[-1]):
        nxt = compacta.derivative(levels[-1])
        if nxt == levels[-1]:
            break
        levels.append(nxt)
    bar_h, pitch = 22, 34
    span = _W - 2 * _MARGIN
    body = []
    for i, level in enumerate(levels):
        y = _MARGIN + i * pitch
        body.append(_text(_MARGIN, y - 4, f"level {i}"))
        if compacta.is_empty(level):
            body.append(_rect(_MARGIN, y, span, bar_h, "#eeeeee"))
            continue
        body.append(_rect(_MARGIN, y, span, bar_h, "#3a6ea5"))
        for g in compacta.contiguous_intervals(level, gaps_per_level):
            x = _MARGIN + span * float(g.lo)
            w = span * float(g.width)
            body.append(_rect(x, y, max(w, 0.5), bar_h, "#ffffff"))
    height = _MARGIN + len(levels) * pitch + _MARGIN // 2
    return _svg(height, body)


def gamma_trace_svg(pair_counts) -> str:
    """Bar per iteration step, height proportional to the pair count."""
    counts = [int(c) for c in pair_counts]
    if not counts:
        raise ValueError("need at least one step")
    top = max(counts)
    chart_h = 160
    bar_w = min(60, (_W - 2 * _MARGIN) / max(1, len(counts)) * 0.8)
    pitch = (_W - 2 * _MARGIN) / max(1, len(counts))
    body = [_text(_MARGIN, _MARGIN - 12, "pairs per step")]
    for i, c in enumerate(counts):
        h = chart_h * (c / top) if top else 0
        x = _MARGIN + i * pitch + (pitch - bar_w) / 2
        y = _MARGIN + chart_h - h
        body.append(_rect(x, y, bar_w, h, "#3a6ea5"))
        body.append(_text(x + bar_w / 2, y - 4, str(c), anchor="middle"))
        body.append(
            _text(x + bar_w / 2, _MARGIN + chart_h + 16, str(i), anchor="middle"))
    return _svg(_MARGIN + chart_h + 40, body)


def density_bars_svg(rows) -> str:
    """Bar per window length; height is the exact density in [0, 1]."""
    rows = [(int(l), int(k), str(d)) for l, k, d in rows]
    if not rows:
        raise ValueError("need at least one row")
    chart_h = 160
    pitch = (_W - 2 * _MARGIN) / len(rows)
    bar_w = min(48, pitch * 0.8)
    body = [_text(_MARGIN, _MARGIN - 12, "independence density by window")]
    for i, (l, _, dens) in enumerate(rows):
        value = float(Fraction(dens))
        h = chart_h * value
        x = _MARGIN + i * pitch + (pitch - bar_w) / 2
        y = _MARGIN + chart_h - h
        body.append(_rect(x, y, bar_w, h, "#2e7d32"))
        body.append(_text(x + bar_w / 2, y - 4, dens, anchor="middle"))
        body.append(
            _text(x + bar_w / 2, _MARGIN + chart_h + 16, str(l), anchor="middle"))
    return _svg(_MARGIN + chart_h + 40, body)
