"""Output envelope and JSON / CSV / text rendering.

High-precision numbers are serialized as decimal strings with enough digits
to round-trip at their precision, always next to a ``precision_bits`` field.
"""

from __future__ import annotations

import csv
import io
import json
import math

import mpmath
from mpmath.libmp import to_str

SCHEMA_VERSION = "1.0"


def digits_for(bits):
    """Decimal digits needed to round-trip a ``bits``-bit mantissa."""
    return int(math.ceil(bits * math.log10(2))) + 1


def dec(x, bits):
    """Decimal string of a real value at ``bits`` precision."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    mpf_value = getattr(x, "_mpf_", None)
    if mpf_value is None:
        mpf_value = mpmath.mpf(x)._mpf_
    return to_str(mpf_value, digits_for(bits))


def real(x, bits):
    if x is None:
        return None
    if hasattr(x, "_mpc_"):
        x = x.real
    return {"value": dec(x, bits), "precision_bits": bits}


def cplx(x, bits):
    if x is None:
        return None
    if not hasattr(x, "_mpc_") and not isinstance(x, complex):
        return {"re": dec(x, bits), "im": "0.0", "precision_bits": bits}
    return {"re": dec(x.real, bits), "im": dec(x.imag, bits), "precision_bits": bits}


def envelope(command, request, result, warnings=()):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "request_echo": request,
        "result": result,
        "warnings": list(warnings),
    }


def to_json(env):
    return json.dumps(env, indent=2) + "\n"


def _flatten(value, prefix=""):
    """Flatten nested numeric dicts into ``key.re`` / ``key.value`` columns."""
    out = {}
    if isinstance(value, dict):
        for k, v in value.items():
            if k == "precision_bits" and prefix:
                out[f"{prefix}.precision_bits"] = v
                continue
            out.update(_flatten(v, f"{prefix}.{k}" if prefix else k))
    elif isinstance(value, list):
        out[prefix] = ";".join(str(v) for v in value)
    else:
        out[prefix] = "" if value is None else value
    return out


def to_csv(rows):
    """RFC 4180 CSV with a header row from a list of (nested) dicts."""
    flat = [_flatten(r) for r in rows]
    header = []
    for row in flat:
        for key in row:
            if key not in header:
                header.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\r\n")
    writer.writeheader()
    for row in flat:
        writer.writerow(row)
    return buf.getvalue()


def _text_value(v):
    if not isinstance(v, dict) or "precision_bits" not in v:
        return None
    if set(v) == {"re", "im", "precision_bits"}:
        return f"({v['re']}, {v['im']})  [{v['precision_bits']} bits]"
    if set(v) == {"value", "precision_bits"}:
        return f"{v['value']}  [{v['precision_bits']} bits]"
    return None


def to_text(env):
    lines = [f"# {env['command']} (schema {env['schema_version']})"]

    def walk(value, indent):
        pad = "  " * indent
        if isinstance(value, dict):
            for k, v in value.items():
                shown = _text_value(v)
                if shown is not None:
                    lines.append(f"{pad}{k}: {shown}")
                elif isinstance(v, (dict, list)):
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {v}")
        elif isinstance(value, list):
            for item in value:
                shown = _text_value(item)
                if shown is not None:
                    lines.append(f"{pad}- {shown}")
                elif isinstance(item, (dict, list)):
                    lines.append(f"{pad}-")
                    walk(item, indent + 1)
                else:
                    lines.append(f"{pad}- {item}")

    walk({"request": env["request_echo"], "result": env["result"]}, 0)
    for w in env["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"
