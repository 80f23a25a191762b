#!/usr/bin/env python3
"""Regenerate the bundled test fixtures.

Writes two NVD JSON 1.1 feed files, an Exploit-DB style CSV export and a
patch-events CSV under crates/core/tests/data/. Every record's base score
is computed here, by an independent Python implementation of the standard
CVSS v2 equations, so the Rust scoring path is checked against a second
implementation rather than against itself.

The generator is seeded: rerunning it reproduces the files byte for byte.
"""

import csv
import datetime
import json
import math
import os
import random

SEED = 20160523
HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.normpath(os.path.join(HERE, "..", "crates", "core", "tests", "data"))

AV = {"N": 1.0, "A": 0.646, "L": 0.395}
AC = {"H": 0.35, "M": 0.61, "L": 0.71}
AU = {"N": 0.704, "S": 0.56, "M": 0.45}
CIA = {"N": 0.0, "P": 0.275, "C": 0.660}

AV_NAME = {"N": "NETWORK", "A": "ADJACENT_NETWORK", "L": "LOCAL"}
AC_NAME = {"H": "HIGH", "M": "MEDIUM", "L": "LOW"}
AU_NAME = {"N": "NONE", "S": "SINGLE", "M": "MULTIPLE"}
CIA_NAME = {"N": "NONE", "P": "PARTIAL", "C": "COMPLETE"}


def round1(x):
    return math.floor(x * 10 + 0.5) / 10


def impact_sub(c, i, a):
    return 10.41 * (1 - (1 - CIA[c]) * (1 - CIA[i]) * (1 - CIA[a]))


def exploitability_sub(av, ac, au):
    return 20 * AC[ac] * AU[au] * AV[av]


def base_score(impact, exploitability):
    f = 0.0 if impact == 0 else 1.176
    return round1(max(0.0, min(10.0, (0.6 * impact + 0.4 * exploitability - 1.5) * f)))


def severity(base):
    if base >= 7.0:
        return "HIGH"
    if base >= 4.0:
        return "MEDIUM"
    return "LOW"


# Per-platform incidence of (C, I, A) combinations the corpus must hit.
ANDROID_COUNTS = {
    ("C", "C", "C"): 442, ("C", "C", "N"): 1, ("C", "N", "C"): 3, ("C", "N", "N"): 9,
    ("P", "P", "P"): 62, ("P", "P", "N"): 58, ("P", "N", "C"): 4, ("P", "N", "P"): 1,
    ("P", "N", "N"): 134, ("N", "C", "C"): 6, ("N", "P", "P"): 17, ("N", "P", "N"): 54,
    ("N", "N", "C"): 7, ("N", "N", "P"): 28,
}
IOS_COUNTS = {
    ("C", "C", "C"): 187, ("C", "N", "N"): 3, ("P", "P", "P"): 293, ("P", "P", "N"): 33,
    ("P", "N", "C"): 1, ("P", "N", "P"): 1, ("P", "N", "N"): 173, ("N", "C", "C"): 3,
    ("N", "C", "N"): 2, ("N", "P", "P"): 4, ("N", "P", "N"): 102, ("N", "N", "C"): 18,
    ("N", "N", "P"): 25,
}
assert sum(ANDROID_COUNTS.values()) == 826
assert sum(IOS_COUNTS.values()) == 845

EXPL_COMBOS = [
    (("N", "L", "N"), 22), (("N", "M", "N"), 38), (("N", "H", "N"), 8),
    (("L", "L", "N"), 14), (("L", "M", "N"), 6), (("N", "L", "S"), 4),
    (("A", "L", "N"), 3), (("N", "M", "S"), 2), (("L", "H", "N"), 2),
    (("N", "H", "S"), 1),
]

YEAR_WEIGHTS = [(2009, 2), (2010, 3), (2011, 4), (2012, 6), (2013, 8),
                (2014, 12), (2015, 20), (2016, 10)]

ANDROID_OS_VERSIONS = ["2.3.6", "4.0.4", "4.4.4", "5.0.2", "5.1.1", "6.0", "6.0.1"]
IOS_OS_VERSIONS = ["7.1.2", "8.4.1", "9.0.2", "9.1", "9.2.1", "9.3", "9.3.2"]
APP_VENDORS = [
    ("whatsapp", "whatsapp"), ("mozilla", "firefox"), ("opera", "opera_browser"),
    ("adobe", "flash_player"), ("tencent", "wechat"), ("dropbox", "dropbox"),
    ("ucweb", "uc_browser"), ("cyanogenmod", "cm_browser"), ("baidu", "browser"),
    ("sina", "weibo"), ("kingsoft", "wps_office"), ("estrongs", "es_file_explorer"),
    ("skype", "skype"), ("evernote", "evernote"), ("kakao", "kakaotalk"),
]
DESCRIPTIONS = [
    "Buffer overflow in the {comp} component allows remote attackers to execute arbitrary code via a crafted media file.",
    "The {comp} component does not properly validate input, which allows attackers to cause a denial of service.",
    "Integer overflow in {comp} allows attackers to gain privileges via a crafted application.",
    "The {comp} implementation mishandles certain requests, allowing attackers to obtain sensitive information.",
    "Use-after-free vulnerability in {comp} allows remote attackers to execute arbitrary code via a crafted web page.",
    "{comp} does not properly restrict access, which allows local users to bypass intended permissions.",
]
COMPONENTS = [
    "mediaserver", "libstagefright", "kernel sound driver", "WebKit", "libutils",
    "Bluetooth stack", "telephony service", "certificate parser", "image decoder",
    "IPC binder", "sandbox profile", "URL handler",
]

# Well-known entries kept with their published vectors; each consumes one
# slot of its platform's (C,I,A) bucket.
REAL_RECORDS = [
    ("CVE-2015-1538", "android", "os", ("C", "C", "C"), ("N", "M", "N"), "2015-10-01"),
    ("CVE-2015-1539", "android", "os", ("C", "C", "C"), ("N", "M", "N"), "2015-10-01"),
    ("CVE-2015-3864", "android", "os", ("C", "C", "C"), ("N", "M", "N"), "2015-10-01"),
    ("CVE-2015-6602", "android", "os", ("C", "C", "C"), ("N", "M", "N"), "2015-10-01"),
    ("CVE-2014-3153", "android", "os", ("C", "C", "C"), ("L", "L", "N"), "2014-06-07"),
    ("CVE-2011-1823", "android", "os", ("C", "C", "C"), ("L", "L", "N"), "2011-04-21"),
    ("CVE-2015-3636", "android", "os", ("C", "C", "C"), ("L", "L", "N"), "2015-08-06"),
    ("CVE-2014-4377", "ios", "os", ("C", "C", "C"), ("N", "M", "N"), "2014-09-18"),
    ("CVE-2014-1266", "ios", "os", ("P", "P", "N"), ("N", "M", "N"), "2014-02-22"),
]

OTHER_RECORDS_ANDROID = 6
OTHER_RECORDS_IOS = 4


def pick_weighted(rng, pairs):
    total = sum(w for _, w in pairs)
    roll = rng.uniform(0, total)
    acc = 0.0
    for value, weight in pairs:
        acc += weight
        if roll <= acc:
            return value
    return pairs[-1][0]


def random_date(rng, year):
    month = rng.randint(1, 5) if year == 2016 else rng.randint(1, 12)
    day = rng.randint(1, 28)
    return datetime.date(year, month, day)


class IdAllocator:
    def __init__(self):
        self.next_seq = {}

    def allocate(self, year):
        seq = self.next_seq.get(year, 70000)
        self.next_seq[year] = seq + 1
        return f"CVE-{year}-{seq}"


def os_cpes(rng, platform):
    if platform == "android":
        versions = rng.sample(ANDROID_OS_VERSIONS, rng.randint(1, 3))
        return [f"cpe:2.3:o:google:android:{v}:*:*:*:*:*:*:*" for v in sorted(versions)]
    versions = rng.sample(IOS_OS_VERSIONS, rng.randint(1, 3))
    return [f"cpe:2.3:o:apple:iphone_os:{v}:*:*:*:*:*:*:*" for v in sorted(versions)]


def app_cpes(rng, platform):
    vendor, product = rng.choice(APP_VENDORS)
    version = f"{rng.randint(1, 9)}.{rng.randint(0, 9)}.{rng.randint(0, 9)}"
    marker = (
        "cpe:2.3:a:google:android:-:*:*:*:*:*:*:*"
        if platform == "android"
        else "cpe:2.3:a:apple:iphone_os:-:*:*:*:*:*:*:*"
    )
    return [f"cpe:2.3:a:{vendor}:{product}:{version}:*:*:*:*:*:*:*", marker]


def other_cpes(rng):
    choices = [
        ["cpe:2.3:o:linux:linux_kernel:3.10:*:*:*:*:*:*:*"],
        ["cpe:2.3:o:microsoft:windows_10:-:*:*:*:*:*:*:*"],
        ["cpe:2.3:a:openssl:openssl:1.0.1:*:*:*:*:*:*:*"],
        ["cpe:2.3:o:canonical:ubuntu_linux:14.04:*:*:*:*:*:*:*"],
    ]
    return rng.choice(choices)


def make_record(rng, ids, platform, cia, expl=None, cve=None, scope=None, published=None):
    if published is None:
        published = random_date(rng, pick_weighted(rng, YEAR_WEIGHTS))
    else:
        published = datetime.date.fromisoformat(published)
    if cve is None:
        cve = ids.allocate(published.year)
    if scope is None:
        scope = "os" if rng.random() < (0.62 if platform == "android" else 0.70) else "app"
    if expl is None:
        expl = pick_weighted(rng, EXPL_COMBOS)
    if platform == "other":
        cpes = other_cpes(rng)
    elif scope == "os":
        cpes = os_cpes(rng, platform)
    else:
        cpes = app_cpes(rng, platform)
    return {
        "cve": cve,
        "platform": platform,
        "scope": scope,
        "cia": cia,
        "expl": expl,
        "published": published,
        "cpes": cpes,
    }


def nvd_item(rng, record):
    c, i, a = record["cia"]
    av, ac, au = record["expl"]
    vector = f"AV:{av}/AC:{ac}/Au:{au}/C:{c}/I:{i}/A:{a}"
    impact = impact_sub(c, i, a)
    exploitability = exploitability_sub(av, ac, au)
    base = base_score(impact, exploitability)
    description = rng.choice(DESCRIPTIONS).format(comp=rng.choice(COMPONENTS))
    published = record["published"].isoformat()
    return {
        "cve": {
            "data_type": "CVE",
            "data_format": "MITRE",
            "data_version": "4.0",
            "CVE_data_meta": {"ID": record["cve"], "ASSIGNER": "cve@mitre.org"},
            "description": {"description_data": [{"lang": "en", "value": description}]},
        },
        "configurations": {
            "CVE_data_version": "4.0",
            "nodes": [
                {
                    "operator": "OR",
                    "cpe_match": [
                        {"vulnerable": True, "cpe23Uri": uri} for uri in record["cpes"]
                    ],
                }
            ],
        },
        "impact": {
            "baseMetricV2": {
                "cvssV2": {
                    "version": "2.0",
                    "vectorString": vector,
                    "accessVector": AV_NAME[av],
                    "accessComplexity": AC_NAME[ac],
                    "authentication": AU_NAME[au],
                    "confidentialityImpact": CIA_NAME[c],
                    "integrityImpact": CIA_NAME[i],
                    "availabilityImpact": CIA_NAME[a],
                    "baseScore": base,
                },
                "severity": severity(base),
                "exploitabilityScore": round1(exploitability),
                "impactScore": round1(min(10.0, impact)),
                "obtainAllPrivilege": False,
                "obtainUserPrivilege": False,
                "obtainOtherPrivilege": False,
                "userInteractionRequired": False,
            }
        },
        "publishedDate": f"{published}T00:00Z",
        "lastModifiedDate": f"{published}T00:00Z",
    }


def skip_item(cve, published, flavor):
    item = {
        "cve": {
            "data_type": "CVE",
            "data_format": "MITRE",
            "data_version": "4.0",
            "CVE_data_meta": {"ID": cve, "ASSIGNER": "cve@mitre.org"},
            "description": {"description_data": [{"lang": "en", "value": "Rejected or v3-only entry."}]},
        },
        "configurations": {"CVE_data_version": "4.0", "nodes": []},
        "impact": {},
        "publishedDate": f"{published}T00:00Z",
        "lastModifiedDate": f"{published}T00:00Z",
    }
    if flavor == "v3only":
        item["impact"] = {
            "baseMetricV3": {
                "cvssV3": {
                    "version": "3.0",
                    "vectorString": "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
                    "baseScore": 9.8,
                },
                "exploitabilityScore": 3.9,
                "impactScore": 5.9,
            }
        }
    elif flavor == "nodate":
        del item["publishedDate"]
        item["impact"] = {
            "baseMetricV2": {
                "cvssV2": {
                    "version": "2.0",
                    "vectorString": "AV:N/AC:L/Au:N/C:P/I:N/A:N",
                    "baseScore": 5.0,
                }
            }
        }
    return item


def build_platform_records(rng, ids, platform, counts):
    buckets = {cia: count for cia, count in counts.items()}
    records = []
    for cve, plat, scope, cia, expl, published in REAL_RECORDS:
        if plat != platform:
            continue
        assert buckets[cia] > 0
        buckets[cia] -= 1
        records.append(make_record(rng, ids, platform, cia, expl, cve, scope, published))
    for cia in sorted(buckets):
        for _ in range(buckets[cia]):
            records.append(make_record(rng, ids, platform, cia))
    return records


def months_after(rng, date, lo, hi):
    days = rng.randint(lo * 30, hi * 30)
    return date + datetime.timedelta(days=days)


def build_edb_rows(rng, records, plan, platform, first_edb_id):
    """plan: (singles, doubles, unlinked, unknown_rows, anomalous)."""
    singles, doubles, unlinked, unknown_rows, anomalous = plan
    rows = []
    edb_id = first_edb_id
    # well-known entries always get exploit rows; the rest are sampled
    pool = [r for r in records if r["platform"] == platform]
    real_ids = {cve for cve, plat, *_ in REAL_RECORDS if plat == platform}
    real = [r for r in pool if r["cve"] in real_ids]
    synthetic = [r for r in pool if r["cve"] not in real_ids]
    chosen = real + rng.sample(synthetic, singles + doubles - len(real))
    rng.shuffle(chosen)

    def describe(kind):
        if kind == "poc":
            return rng.choice([
                "{} - Memory Corruption PoC".format(rng.choice(COMPONENTS)).title(),
                "Crash PoC for {}".format(rng.choice(COMPONENTS)),
            ])
        return rng.choice([
            "{} - Remote Code Execution".format(rng.choice(COMPONENTS)).title(),
            "{} - Privilege Escalation Exploit".format(rng.choice(COMPONENTS)).title(),
        ])

    def row(date, row_type, description, codes):
        nonlocal edb_id
        rows.append({
            "id": str(edb_id),
            "file": f"exploits/{platform}/{row_type}/{edb_id}.txt",
            "description": description,
            "date": date.isoformat(),
            "author": rng.choice(["anonymous", "metasploit", "jduck", "laginimaineb", "qwertyoruiop"]),
            "platform": platform,
            "type": row_type,
            "port": "",
            "codes": codes,
        })
        edb_id += 1

    fanout_used = False
    for index, record in enumerate(chosen):
        double = index >= singles
        count = 2 if double else 1
        for n in range(count):
            row_type = pick_weighted(rng, [("remote", 5), ("local", 3), ("dos", 2)])
            description = describe("poc" if row_type == "dos" or rng.random() < 0.2 else "exploit")
            date = months_after(rng, record["published"], 0, 14)
            codes = record["cve"]
            if not double and not fanout_used and index + 1 < singles:
                # one row linking two CVEs at once
                codes = f"{record['cve']};{chosen[index + 1]['cve']}"
                fanout_used = True
            row(date, row_type, description, codes)
    for n in range(anomalous):
        record = chosen[n]
        date = record["published"] - datetime.timedelta(days=rng.randint(10, 60))
        row(date, "remote", describe("exploit"), record["cve"])
    for n in range(unknown_rows):
        date = datetime.date(2016, 1, 15)
        row(date, "remote", describe("exploit"), "CVE-2008-99999")
    for n in range(unlinked):
        year = pick_weighted(rng, YEAR_WEIGHTS)
        date = random_date(rng, year)
        row_type = pick_weighted(rng, [("remote", 4), ("local", 3), ("dos", 3)])
        row(date, row_type, describe("poc" if row_type == "dos" else "exploit"), "")
    return rows, edb_id


def build_patch_rows(rng, records, edb_rows):
    linked = []
    seen = set()
    by_cve = {r["cve"]: r for r in records}
    for row in edb_rows:
        for code in row["codes"].split(";"):
            if code in by_cve and code not in seen:
                seen.add(code)
                linked.append(by_cve[code])
    rows = []
    for record in linked:
        if rng.random() < 0.65:
            patch_date = months_after(rng, record["published"], 1, 10)
            rows.append({"cve_id": record["cve"], "date": patch_date.isoformat(), "kind": "patch"})
            if rng.random() < 0.4:
                update = patch_date + datetime.timedelta(days=rng.randint(20, 90))
                rows.append({"cve_id": record["cve"], "date": update.isoformat(), "kind": "update"})
    # a few patches for CVEs that never got an exploit
    unexploited = [r for r in records if r["cve"] not in seen and r["platform"] != "other"]
    for record in rng.sample(unexploited, 12):
        patch_date = months_after(rng, record["published"], 1, 8)
        rows.append({"cve_id": record["cve"], "date": patch_date.isoformat(), "kind": "patch"})
    rows.sort(key=lambda r: (r["cve_id"], r["date"], r["kind"]))
    return rows


def write_feed(path, items):
    items = sorted(items, key=lambda item: item["cve"]["CVE_data_meta"]["ID"])
    feed = {
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_data_numberOfCVEs": str(len(items)),
        "CVE_data_timestamp": "2016-05-23T08:00Z",
        "CVE_Items": items,
    }
    with open(path, "w") as fh:
        json.dump(feed, fh, separators=(",", ":"), sort_keys=False)
        fh.write("\n")


def write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def main():
    rng = random.Random(SEED)
    ids = IdAllocator()
    os.makedirs(OUT, exist_ok=True)

    android = build_platform_records(rng, ids, "android", ANDROID_COUNTS)
    ios = build_platform_records(rng, ids, "ios", IOS_COUNTS)
    others_android = [
        make_record(rng, ids, "other", rng.choice([("C", "C", "C"), ("P", "N", "N"), ("P", "P", "P")]))
        for _ in range(OTHER_RECORDS_ANDROID)
    ]
    others_ios = [
        make_record(rng, ids, "other", rng.choice([("C", "C", "C"), ("N", "P", "N")]))
        for _ in range(OTHER_RECORDS_IOS)
    ]

    android_items = [nvd_item(rng, r) for r in android + others_android]
    android_items.append(skip_item("CVE-2016-79001", "2016-03-01", "noimpact"))
    android_items.append(skip_item("CVE-2016-79002", "2016-03-02", "v3only"))
    android_items.append(skip_item("CVE-2016-79003", "2016-03-03", "nodate"))
    ios_items = [nvd_item(rng, r) for r in ios + others_ios]
    ios_items.append(skip_item("CVE-2016-79004", "2016-04-01", "noimpact"))
    ios_items.append(skip_item("CVE-2016-79005", "2016-04-02", "v3only"))

    write_feed(os.path.join(OUT, "nvd_android.json"), android_items)
    write_feed(os.path.join(OUT, "nvd_ios.json"), ios_items)

    # android: 44 rows = 22 singles + 2 doubles (4 rows) + 2 anomalous
    #          + 1 unknown-CVE + 15 unlinked  (29 with codes, 15 without)
    android_rows, next_id = build_edb_rows(
        rng, android, (22, 2, 15, 1, 2), "android", 35000
    )
    assert len(android_rows) == 44
    assert sum(1 for r in android_rows if r["codes"] == "") == 15

    # ios: 142 rows = 21 singles + 2 doubles (4 rows) + 117 unlinked
    ios_rows, _ = build_edb_rows(rng, ios, (21, 2, 117, 0, 0), "ios", next_id)
    assert len(ios_rows) == 142

    edb_rows = android_rows + ios_rows
    edb_rows.sort(key=lambda r: int(r["id"]))
    write_csv(
        os.path.join(OUT, "edb.csv"),
        edb_rows,
        ["id", "file", "description", "date", "author", "platform", "type", "port", "codes"],
    )

    patch_rows = build_patch_rows(rng, android + ios, edb_rows)
    write_csv(os.path.join(OUT, "patches.csv"), patch_rows, ["cve_id", "date", "kind"])

    total_linked = sum(1 for r in edb_rows if r["codes"] != "")
    total_unlinked = sum(1 for r in edb_rows if r["codes"] == "")
    print(f"records: android={len(android)} ios={len(ios)} other={len(others_android) + len(others_ios)}")
    print(f"feed items: android_file={len(android_items)} ios_file={len(ios_items)}")
    print(f"edb rows: total={len(edb_rows)} linked={total_linked} unlinked={total_unlinked}")
    print(f"patch rows: {len(patch_rows)}")
    print(f"expected ingest summary: kept={len(android) + len(ios) + len(others_android) + len(others_ios)} skipped=5 unlinked={total_unlinked}")


if __name__ == "__main__":
    main()
