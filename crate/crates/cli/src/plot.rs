//! Plot scripts written next to the CSVs. They need Python with matplotlib;
//! the binary itself never plots.

const HEADER: &str = r#"#!/usr/bin/env python3
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent


def series(name):
    t, v, label = [], [], None
    with open(here / name, newline="") as f:
        for row in csv.DictReader(f):
            t.append(float(row["t"]))
            v.append(float(row["value"]))
            label = row["label"]
    return t, v, label

"#;

/// Script overlaying every listed `t,value,label` CSV on one axis.
pub fn series_script(files: &[String], ylabel: &str, output: &str) -> String {
    let mut s = String::from(HEADER);
    s.push_str("files = [\n");
    for f in files {
        s.push_str(&format!("    {f:?},\n"));
    }
    s.push_str("]\n\nfig, ax = plt.subplots(figsize=(6, 4))\n");
    s.push_str("for name in files:\n    t, v, label = series(name)\n");
    s.push_str("    style = \"k--\" if label == \"TL\" else \"-\"\n");
    s.push_str("    ax.plot(t, v, style, label=label)\n");
    s.push_str(&format!(
        "ax.set_xlabel(\"t\")\nax.set_ylabel({ylabel:?})\nax.legend()\nfig.tight_layout()\n\
         fig.savefig(here / {output:?}, dpi=150)\nif \"--show\" in sys.argv:\n    plt.show()\n"
    ));
    s
}
