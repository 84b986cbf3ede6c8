"""CSV and SVG output for BER records."""
import csv
import io
import math

from ..linear_rx import BerRecord

CSV_HEADER = ("waveform", "receiver", "model", "ebno_db", "n_bits", "n_errors", "ber", "seed")
#: BER values of zero are drawn at this floor on the log axis.
BER_FLOOR = 1e-7


def ordered(records):
    """Grid-major, receiver-minor order (receivers keep their first-seen order)."""
    rank = {}
    for r in records:
        rank.setdefault(r.receiver, len(rank))
    return sorted(records, key=lambda r: (r.ebno_db, rank[r.receiver]))


def csv_text(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in ordered(records):
        writer.writerow([r.waveform, r.receiver, r.model, repr(float(r.ebno_db)), r.n_bits,
                         r.n_errors, repr(float(r.ber)), r.seed])
    return buf.getvalue()


def emit_csv(records, path):
    if not records:
        raise ValueError("no records to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(records))


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("missing or unexpected CSV header")
    records = []
    for row in rows[1:]:
        if not row:
            continue
        ber = float(row[6])
        records.append(BerRecord(
            waveform=row[0], receiver=row[1], model=row[2], ebno_db=float(row[3]),
            n_bits=int(row[4]), n_errors=int(row[5]), ber=ber, seed=int(row[7]),
            error="failed" if math.isnan(ber) else "",
        ))
    return records


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def svg_text(records, title="BER vs Eb/No"):
    """Log-BER plot: one polyline per receiver, zero-BER points marked at the floor."""
    recs = [r for r in ordered(records) if not r.failed]
    if not recs:
        raise ValueError("no valid records to plot")
    width, height = 640, 480
    left, right, top, bottom = 70, 170, 40, 60
    pw, ph = width - left - right, height - top - bottom

    xs = [r.ebno_db for r in recs if math.isfinite(r.ebno_db)]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    ymin = math.log10(BER_FLOOR)
    ymax = 0.0

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(ber):
        v = math.log10(max(ber, BER_FLOOR))
        return top + (ymax - v) / (ymax - ymin) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for dec in range(int(ymin), 1):
        y = py(10.0 ** dec)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" text-anchor="end">1e{dec}</text>')
    for x in sorted(set(xs)):
        xp = px(x)
        out.append(f'<line x1="{xp:.2f}" y1="{top + ph}" x2="{xp:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{xp:.2f}" y="{top + ph + 18}" text-anchor="middle">{x:g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 20}" text-anchor="middle">Eb/No (dB)</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">BER</text>')

    receivers = list(dict.fromkeys(r.receiver for r in recs))
    any_zero = False
    for i, receiver in enumerate(receivers):
        color = _COLORS[i % len(_COLORS)]
        pts = [(r.ebno_db, r.ber) for r in recs if r.receiver == receiver and math.isfinite(r.ebno_db)]
        coords = " ".join(f"{px(x):.2f},{py(b):.2f}" for x, b in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for x, b in pts:
            if b == 0:
                any_zero = True
                cx, cy = px(x), py(b)
                out.append(f'<path d="M{cx - 4:.2f},{cy - 4:.2f} L{cx + 4:.2f},{cy - 4:.2f} '
                           f'L{cx:.2f},{cy + 3:.2f} Z" fill="white" stroke="{color}"/>')
            else:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(b):.2f}" r="2.5" fill="{color}"/>')
        ly = top + 14 + 16 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{receiver}</text>')
    if any_zero:
        ly = top + 14 + 16 * len(receivers) + 10
        out.append(f'<text x="{left + pw + 12}" y="{ly}" font-size="10">'
                   f'&#9661; no errors (drawn at {BER_FLOOR:g})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(records, path, title="BER vs Eb/No"):
    if not records:
        raise ValueError("no records to plot")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_text(records, title))
