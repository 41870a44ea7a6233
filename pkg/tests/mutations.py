"""Single-byte mutations of the cryptographic fields of a transcript document."""
import base64
import copy


def _b64_slots(doc):
    """Yield (label, container, key) for every base64 field that carries protocol data."""
    yield "header.pp", doc["header"], "pp"
    for m in doc["messages"]:
        body = m["body"]
        for key, value in body.items():
            if isinstance(value, list):
                for i in range(len(value)):
                    yield f"{m['phase']}[{m['seq']}].{key}[{i}]", value, i
            elif isinstance(value, str):
                yield f"{m['phase']}[{m['seq']}].{key}", body, key
    for a in (doc["verdicts"] or {}).get("aggregate") or []:
        yield f"verdicts.aggregate[{a['bin']}].y", a, "y"


def critical_fields(doc):
    return [label for label, _, _ in _b64_slots(doc)] + ["header.session_id"]


def mutate(doc, label, position, xor=0x01):
    """Copy of ``doc`` with byte ``position`` (mod length) of field ``label`` XORed with ``xor``."""
    out = copy.deepcopy(doc)
    if label == "header.session_id":
        raw = bytearray(bytes.fromhex(out["header"]["session_id"]))
        raw[position % len(raw)] ^= xor
        out["header"]["session_id"] = raw.hex()
        return out
    for lab, container, key in _b64_slots(out):
        if lab == label:
            raw = bytearray(base64.b64decode(container[key]))
            raw[position % len(raw)] ^= xor
            container[key] = base64.b64encode(bytes(raw)).decode()
            return out
    raise KeyError(label)
