#!/usr/bin/env python3
"""Independent oracle for the corpus statistics over feed_200.jsonl and
cpe_dict.jsonl. Implements the documented counting rules from scratch
(pure Python, no shared code with the engine) and writes expected_stats.json.

Rules:
  * rejected entries (description prefixed "** REJECT **") are excluded;
    total_cves counts the remainder.
  * a CPE string is valid iff it has the cpe:2.3: prefix, exactly 11
    attribute fields split on unescaped ':', part in {a,o,h}, non-empty
    fields, and only legal characters (unescaped: alnum . _ - * ?; escaped:
    any printable punctuation).
  * an entry has a valid CPE when any match in its configuration tree
    parses.
  * config-specific: any non-vulnerable match anywhere, or any node with
    children.
  * Running-On/With pairs: for each innermost node whose subtree contains
    both vulnerable and non-vulnerable matches, the Cartesian product of
    those two sides, keyed by (vulnerable part, context part).
  * firmware_fraction / same_vendor_config_fraction are over those pair
    instances.
  * a dictionary string is used when its (vendor, product, version) token
    triple appears among the feed's valid matches.

Run from this directory:  python3 corpus_stats_oracle.py
"""

import json
import string


def split_attributes(s):
    """Returns the lowercased attribute tokens, or None if illegal."""
    fields = []
    current = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\":
            if i + 1 >= len(s):
                return None
            nxt = s[i + 1]
            if nxt not in string.printable or nxt.isalnum() or nxt in " \t\n\r\v\f":
                return None
            current.append("\\")
            current.append(nxt)
            i += 2
            continue
        if c == ":":
            fields.append("".join(current))
            current = []
        else:
            lc = c.lower()
            if not (lc.isascii() and (lc.isalnum() or lc in "._-*?")):
                return None
            current.append(lc)
        i += 1
    fields.append("".join(current))
    return fields


def parse_cpe(uri):
    """Returns (part, vendor, product, version) tokens or None."""
    prefix = "cpe:2.3:"
    if not uri.startswith(prefix):
        return None
    fields = split_attributes(uri[len(prefix):])
    if fields is None or len(fields) != 11:
        return None
    if fields[0] not in ("a", "o", "h"):
        return None
    if any(f == "" for f in fields):
        return None
    return fields[0], fields[1], fields[2], fields[3]


def unescape(token):
    out = []
    i = 0
    while i < len(token):
        if token[i] == "\\" and i + 1 < len(token):
            out.append(token[i + 1])
            i += 2
        else:
            out.append(token[i])
            i += 1
    return "".join(out)


def iter_nodes(node):
    yield node
    for child in node.get("children", []):
        yield from iter_nodes(child)


def valid_matches(node):
    for m in node.get("cpe_match", []):
        parsed = parse_cpe(m.get("cpe23Uri", ""))
        if parsed is not None:
            yield m, parsed


def subtree_pairs(node, sink):
    """Innermost-node Cartesian rule. Returns (vuln, ctx, emitted_below)."""
    vuln, ctx = [], []
    emitted_below = False
    for m, parsed in valid_matches(node):
        (vuln if m.get("vulnerable", True) else ctx).append(parsed)
    for child in node.get("children", []):
        cv, cc, ce = subtree_pairs(child, sink)
        emitted_below = emitted_below or ce
        vuln.extend(cv)
        ctx.extend(cc)
    if not emitted_below and vuln and ctx:
        for v in vuln:
            for c in ctx:
                sink.append((v, c))
        emitted_below = True
    return vuln, ctx, emitted_below


def main():
    records = []
    with open("feed_200.jsonl") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))

    active = []
    for item in records:
        desc = ""
        for d in item["cve"].get("description", {}).get("description_data", []):
            if d.get("lang", "en") == "en":
                desc = d.get("value", "")
                break
        if not desc.startswith("** REJECT **"):
            active.append(item)

    total = len(active)
    with_valid_cpe = 0
    config_specific = 0
    pairs = []
    used_keys = set()

    for item in active:
        nodes = item.get("configurations", {}).get("nodes", [])
        has_valid = False
        specific = False
        for node in nodes:
            if node.get("children"):
                specific = True
            for sub in iter_nodes(node):
                for m, parsed in valid_matches(sub):
                    has_valid = True
                    used_keys.add("|".join(parsed[1:4]))
                    if not m.get("vulnerable", True):
                        specific = True
            vuln, ctx, emitted = subtree_pairs(node, pairs)
        if has_valid:
            with_valid_cpe += 1
        if specific:
            config_specific += 1

    pair_counts = {}
    firmware = 0
    same_vendor = 0
    for v, c in pairs:
        key = f"{v[0]}:{c[0]}"
        pair_counts[key] = pair_counts.get(key, 0) + 1
        if "firmware" in unescape(v[2]):
            firmware += 1
        if v[1] == c[1]:
            same_vendor += 1

    dict_keys = set()
    with open("cpe_dict.jsonl") as fh:
        for line in fh:
            if not line.strip():
                continue
            parsed = parse_cpe(json.loads(line)["cpe23"])
            if parsed is not None:
                dict_keys.add("|".join(parsed[1:4]))

    unused = sum(1 for k in dict_keys if k not in used_keys)
    total_pairs = len(pairs)

    stats = {
        "total_cves": total,
        "cves_with_valid_cpe": with_valid_cpe,
        "cpe_usage_fraction": with_valid_cpe / total if total else 0.0,
        "unused_dictionary_fraction": unused / len(dict_keys) if dict_keys else 0.0,
        "config_specific_fraction": config_specific / total if total else 0.0,
        "runningon_pair_counts": dict(sorted(pair_counts.items())),
        "firmware_fraction": firmware / total_pairs if total_pairs else 0.0,
        "same_vendor_config_fraction": same_vendor / total_pairs if total_pairs else 0.0,
    }
    with open("expected_stats.json", "w") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(stats, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
