#!/usr/bin/env python3
"""Regenerates the generated fixtures: the reference corpus with its golden
files and the 1000-line usage log. Output is deterministic.

    python3 fixtures/generate.py

Golden values are written from the generator's own knowledge of what it
planted, never by running the Rust code.
"""

import os
import random
import re

HERE = os.path.dirname(os.path.abspath(__file__))

# canonical title -> written forms used in entries
JOURNALS = {
    "Astron. Astrophys.": ["Astron. Astrophys.", "A & A", "A&A", "A A", "AAL", "A A Lett.", "A A Letters"],
    "ACM Comput. Surv.": ["ACM Comput. Surv.", "ACM Computing Surveys"],
    "ACM SIGPLAN Not.": ["ACM SIGPLAN Not.", "ACM SIGPLAN Notices", "ACM SN"],
    "IEEE J. Quantum Electron.": ["IEEE J. Quantum Electron.", "IJQE"],
    "J. High Energy Phys.": ["J. High Energy Phys.", "JHEP"],
    "New Sci.": ["New Sci.", "New Scientist"],
    "Phys. Rev., A": ["Phys. Rev. A", "Phys. Rev., A", "Physical Review A", "Phys Rev A", "PRA", "Phys.Rev.A"],
}

AUTHORS = [
    "D. Grumiller", "W. Kummer", "D. V. Vassilevich", "J. Lindqvist", "T. Simko",
    "E. Witten", "M. Cavaglia", "L. Bergamin", "R. Jackiw", "C. Teitelboim",
    "E. Schrödinger", "A. Strominger", "C. Vafa", "J. M. Maldacena", "S. Carlip",
    "H. Verlinde", "K. Takahashi", "N. Ikeda", "P. Schaller", "T. Strobl",
]

TITLE_WORDS = [
    "dilaton", "gravity", "quantum", "black", "holes", "two", "dimensions",
    "virtual", "states", "scattering", "matter", "fields", "lattice", "solutions",
    "exact", "models", "boundary", "entropy", "thermodynamics", "classical",
    "integrable", "systems", "open", "access", "digital", "libraries", "document",
    "servers", "metadata", "harvesting", "citation", "analysis",
]

PROSE_WORDS = [
    "the", "model", "describes", "how", "fields", "interact", "with", "geometry",
    "we", "compute", "scattering", "amplitudes", "and", "compare", "results",
    "previous", "work", "shows", "that", "boundary", "terms", "matter", "this",
    "note", "extends", "earlier", "analysis", "of", "dilaton", "gravity", "in",
    "two", "dimensions", "our", "approach", "uses", "exact", "path", "integral",
    "methods", "see", "also", "discussion", "below", "for", "details",
]

PUBLISHERS = ["Cambridge University Press, Cambridge", "Springer, Berlin", "World Scientific, Singapore"]
ARCHIVES = ["hep-th", "gr-qc", "hep-ph", "astro-ph", "math-ph"]
INSTITUTES = ["CERN-TH", "DESY-THEORY", "SLAC-PUB", "FERMILAB-CONF"]

MARKER_START = [
    re.compile(r"^\[\d{1,4}\]"),
    re.compile(r"^\d{1,4}\.(\s|$)"),
    re.compile(r"^\(\d{1,4}\)"),
]


def authors(rng):
    names = rng.sample(AUTHORS, rng.randint(1, 3))
    if len(names) == 1:
        return names[0]
    return ", ".join(names[:-1]) + " and " + names[-1]


def title(rng):
    return " ".join(rng.sample(TITLE_WORDS, rng.randint(3, 6))).capitalize()


def page(rng):
    while True:
        p = rng.randint(1, 2999)
        if not 1800 <= p <= 2100:
            return p


def old_arxiv(rng, year):
    return f"{rng.choice(ARCHIVES)}/{year % 100:02d}{rng.randint(1, 12):02d}{rng.randint(1, 999):03d}"


def entry(rng):
    """Returns (text, journal, volume, page, year) for one citation."""
    year = rng.randint(1954, 2007)
    kind = rng.choice(["ja", "jb", "jc", "jhep", "preprint", "report", "book", "url"])
    au = authors(rng)
    if kind in ("ja", "jb", "jc"):
        canonical = rng.choice([c for c in JOURNALS if c != "J. High Energy Phys."])
        alias = rng.choice(JOURNALS[canonical])
        vol = str(rng.randint(1, 999))
        pg = page(rng)
        if kind == "ja":
            text = f"{au}, {alias} {vol} ({year}) {pg}"
        elif kind == "jb":
            text = f'{au}, "{title(rng)}", {alias} {vol}, {pg} ({year}).'
        else:
            year = rng.randint(1992, 2007)
            rep = old_arxiv(rng, year)
            text = f"{au}, {alias} {vol} ({year}) {pg}-{pg + rng.randint(1, 40)} [{rep}]"
        return text, canonical, vol, str(pg), str(year)
    if kind == "jhep":
        alias = rng.choice(JOURNALS["J. High Energy Phys."])
        year = rng.randint(1997, 2007)
        yy = year % 100
        vol = f"{yy:02d}{rng.randint(1, 12):02d}"
        pg = f"{rng.randint(1, 99):03d}"
        return f"{au}, {alias} {vol} ({year}) {pg}", "J. High Energy Phys.", vol, pg, str(year)
    if kind == "preprint":
        if year >= 2007 or rng.random() < 0.5:
            year = 2007
            ident = f"arXiv:0704.{rng.randint(1, 9999):04d}v{rng.randint(1, 3)}"
        else:
            year = rng.randint(1992, 2006)
            ident = old_arxiv(rng, year)
        return f"{au}, {title(rng)}, {ident} ({year})", "", "", "", str(year)
    if kind == "report":
        return f"{au}, {title(rng)}, {rng.choice(INSTITUTES)}-{year}-{rng.randint(1, 199):03d}", "", "", "", ""
    if kind == "book":
        return f"{au}, {title(rng)} ({rng.choice(PUBLISHERS)}, {year})", "", "", "", str(year)
    slug = "-".join(rng.sample(TITLE_WORDS, 2))
    return f"{au}, {title(rng)}, available at https://example.org/{slug} ({year})", "", "", "", str(year)


def wrap(text, rng, indent):
    """Splits a long entry over lines without starting a line with
    something that reads as a marker."""
    words = text.split(" ")
    lines, cur = [], []
    width = rng.randint(40, 70)
    for w in words:
        if cur and len(" ".join(cur + [w])) > width and not any(p.match(w) for p in MARKER_START):
            lines.append(" ".join(cur))
            cur = [w]
        else:
            cur.append(w)
    lines.append(" ".join(cur))
    return lines[0] + "".join("\n" + indent + l for l in lines[1:])


def prose(rng, paragraphs):
    out = []
    for _ in range(paragraphs):
        words = [rng.choice(PROSE_WORDS) for _ in range(rng.randint(30, 70))]
        para, line = [], []
        for w in words:
            line.append(w)
            if len(" ".join(line)) > 60:
                para.append(" ".join(line))
                line = []
        if line:
            para.append(" ".join(line))
        text = "\n".join(para)
        out.append(text[0].upper() + text[1:] + ".")
    return "\n\n".join(out) + "\n"


HEADINGS = ["References", "REFERENCES", "Bibliography", "7 References", "IV. REFERENCES",
            "Reference list", "References:", "  References  "]


def reference_doc(idx, rng):
    """Returns (text, span_start, [(marker, text, journal, volume, page, year)])."""
    # 0-12 bracket/dotted/paren with heading, 13-15 fallback, 16-17 unmarked,
    # 18 decoy heading, 19 prose numbered list + fallback.
    doc = f"Document {idx:02d}: {title(rng)}\n\n" + prose(rng, rng.randint(2, 4))
    if idx == 18:
        doc += "\nReferences\n\n" + prose(rng, 1)
    if idx == 19:
        doc += "\nOur steps are:\n1. choose a model\n2. compute the amplitudes\n3. compare results\n\n" + prose(rng, 1)
    doc += "\n"
    n = rng.randint(8, 15)
    entries = [entry(rng) for _ in range(n)]
    golden = []
    if idx <= 12 or idx == 18:
        style = ["bracket", "dotted", "paren"][idx % 3]
        span = len(doc.encode())
        doc += HEADINGS[idx % len(HEADINGS)] + "\n"
        if rng.random() < 0.5:
            doc += "\n"
        for i, (text, j, v, p, y) in enumerate(entries, start=1):
            marker = {"bracket": f"[{i}]", "dotted": f"{i}.", "paren": f"({i})"}[style]
            doc += f"{marker} " + wrap(text, rng, " " * rng.randint(2, 6)) + "\n"
            golden.append((marker, text, j, v, p, y))
    elif idx in (13, 14, 15, 19):
        span = len(doc.encode())
        for i, (text, j, v, p, y) in enumerate(entries, start=1):
            marker = f"[{i}]" if idx != 15 else f"{i}."
            doc += f"{marker} {text}\n"
            golden.append((marker, text, j, v, p, y))
    else:
        span = len(doc.encode())
        doc += HEADINGS[idx % len(HEADINGS)] + "\n\n"
        for text, j, v, p, y in entries:
            doc += wrap(text, rng, "") + "\n\n"
            golden.append(("", text, j, v, p, y))
    return doc, span, golden


def write_reference_corpus():
    out_dir = os.path.join(HERE, "refcorpus")
    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(20061)
    for idx in range(20):
        doc, span, golden = reference_doc(idx, rng)
        with open(os.path.join(out_dir, f"doc{idx:02d}.txt"), "w", encoding="utf-8", newline="\n") as f:
            f.write(doc)
        with open(os.path.join(out_dir, f"doc{idx:02d}.golden.tsv"), "w", encoding="utf-8", newline="\n") as f:
            f.write(f"#span_start\t{span}\n")
            f.write("#marker\tjournal\tvolume\tpage\tyear\ttext\n")
            for marker, text, j, v, p, y in golden:
                f.write("\t".join([marker, j, v, p, y, text]) + "\n")


def write_usage_log():
    rng = random.Random(993)
    lines = []
    for _ in range(993):
        ts = 1136073600 + rng.randint(0, 30 * 86400)
        visitor = f"v{rng.randint(1, 60)}"
        record = f"r{min(int(rng.paretovariate(1.2)), 40)}"
        action = "view" if rng.random() < 0.75 else "download"
        lines.append(f"{ts}\t{visitor}\t{record}\t{action}")
    bad = [
        "1136073600\tv1\tr1\tprint",
        "1136073600\tv1\tr1",
        "-5\tv1\tr1\tview",
        "yesterday\tv1\tr1\tview",
        "1136073600\t\tr1\tview",
        "1136073600\tv1\tr1\tview\textra",
        "1136073600\tv1\t\tdownload",
    ]
    for b in bad:
        lines.insert(rng.randint(0, len(lines)), b)
    with open(os.path.join(HERE, "usage_1000.log"), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_reference_corpus()
    write_usage_log()
