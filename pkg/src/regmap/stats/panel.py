"""Regulation x year panel construction and the report-table bundle.

Final Regulated+High pairs are records with keys doi, predictor, rdc,
regulation, year, sector. The panel cell for (year y, regulation r) holds
the adjusted count Y = S * |D_{y,r}| where D is the set of distinct
normalized predictor names, and the exposure N_y = unique publications in
year y. Pair-level tallies in the tables are scaled by S; unique-paper
columns are never scaled.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..audit import MultiplierSet
from ..legal import REFERENCE_YEARS

MIN_RAW_ITEMS_PER_YEAR = 15  # share-over-time exclusion threshold


def normalize_predictor(name: str) -> str:
    return re.sub(r"\s+", " ", name.strip().lower())


@dataclass(frozen=True)
class PanelCell:
    regulation: str
    year: int
    adjusted_count: float  # Y = S * |D_{y,r}|
    raw_distinct: int
    exposure: int  # N_y
    rel: int  # y - E_r
    post: int  # 1[y >= E_r]

    @property
    def rate(self) -> float:
        return self.adjusted_count / self.exposure


def _compound(s) -> float:
    return s.compound if isinstance(s, MultiplierSet) else float(s)


def publications_per_year(corpus) -> dict[int, int]:
    dois_by_year: dict[int, set] = {}
    for rec in corpus:
        if isinstance(rec.year, int):
            dois_by_year.setdefault(rec.year, set()).add(rec.doi)
    return {y: len(d) for y, d in dois_by_year.items()}


def build_panel(final_pairs, corpus, s, reference_years=None) -> list[PanelCell]:
    """Assemble PanelCells from the final pair set and corpus exposures."""
    ref = reference_years or REFERENCE_YEARS
    S = _compound(s)
    n_y = publications_per_year(corpus)
    distinct: dict[tuple[int, str], set] = {}
    for pair in final_pairs:
        y, r = pair["year"], pair["regulation"]
        distinct.setdefault((y, r), set()).add(normalize_predictor(pair["predictor"]))
    cells = []
    for (y, r) in sorted(distinct):
        exposure = n_y.get(y, 0)
        if exposure == 0:
            raise ValueError(f"year {y} has pairs but zero publications in the corpus")
        d = len(distinct[(y, r)])
        cells.append(
            PanelCell(
                regulation=r, year=y,
                adjusted_count=S * d, raw_distinct=d, exposure=exposure,
                rel=y - ref[r], post=int(y >= ref[r]),
            )
        )
    return cells


def rolling_mean(values, window: int = 3):
    """Centered rolling mean; the window truncates at the series edges."""
    v = list(values)
    half = window // 2
    out = []
    for i in range(len(v)):
        lo, hi = max(0, i - half), min(len(v), i + half + 1)
        out.append(sum(v[lo:hi]) / (hi - lo))
    return out


def build_design(panel):
    """Design matrix for the segmented ITS model.

    Columns: one fixed-effect indicator per regulation (no global
    intercept), rel, post, rel*post. Returns (X, y, offset, clusters,
    names).
    """
    regs = sorted({c.regulation for c in panel})
    n = len(panel)
    X = np.zeros((n, len(regs) + 3))
    y = np.zeros(n)
    offset = np.zeros(n)
    clusters = np.empty(n, dtype=object)
    for i, c in enumerate(panel):
        X[i, regs.index(c.regulation)] = 1.0
        X[i, len(regs)] = c.rel
        X[i, len(regs) + 1] = c.post
        X[i, len(regs) + 2] = c.rel * c.post
        y[i] = c.adjusted_count
        offset[i] = np.log(c.exposure)
        clusters[i] = c.regulation
    names = [f"alpha[{r}]" for r in regs] + ["rel", "post", "rel_post"]
    return X, y, offset, clusters, names


def _pairs_frame(final_pairs) -> pd.DataFrame:
    df = pd.DataFrame(list(final_pairs))
    if df.empty:
        df = pd.DataFrame(columns=["doi", "predictor", "rdc", "regulation", "year", "sector"])
    df["predictor_norm"] = df["predictor"].map(normalize_predictor) if len(df) else []
    return df


def report_tables(final_pairs, multipliers: MultiplierSet, corpus=None,
                  use_per_regulation: bool = False) -> dict[str, pd.DataFrame]:
    """Emit the CSV-ready table bundle backing the report figures.

    Adjusted pair tallies are scaled by S (or S_r when
    ``use_per_regulation``); columns counting unique DOIs stay unscaled.
    Empty input yields empty tables.
    """
    df = _pairs_frame(final_pairs)
    S = multipliers.compound

    def scale(reg):
        return multipliers.s_r(reg) if use_per_regulation else S

    tables: dict[str, pd.DataFrame] = {}

    # Per-regulation adjusted pair and distinct-predictor counts (+ unscaled DOIs).
    rows = []
    for reg, g in df.groupby("regulation"):
        rows.append(
            {
                "regulation": reg,
                "adjusted_pairs": len(g) * scale(reg),
                "adjusted_distinct_predictors": g["predictor_norm"].nunique() * scale(reg),
                "unique_dois_unscaled": g["doi"].nunique(),
                "reference_year": REFERENCE_YEARS.get(reg),
            }
        )
    tables["per_regulation"] = (
        pd.DataFrame(rows, columns=["regulation", "adjusted_pairs",
                                    "adjusted_distinct_predictors",
                                    "unique_dois_unscaled", "reference_year"])
        .sort_values("adjusted_pairs", ascending=False, ignore_index=True)
    )

    # Sector shares of adjusted pairs, top ten + Others.
    sec = df.groupby("sector").size().mul(S).sort_values(ascending=False) if len(df) \
        else pd.Series(dtype=float)
    if len(sec):
        top = sec.iloc[:10]
        others = sec.iloc[10:].sum()
        shares = top.copy()
        if others > 0:
            shares["Others"] = others
        shares = shares / shares.sum()
        tables["sector_shares"] = shares.rename("share").rename_axis("sector").reset_index()
    else:
        tables["sector_shares"] = pd.DataFrame(columns=["sector", "share"])

    # RDC distribution of adjusted pairs.
    rdc = df.groupby("rdc").size().mul(S).sort_values(ascending=False) if len(df) \
        else pd.Series(dtype=float)
    tables["rdc_distribution"] = rdc.rename("adjusted_count").rename_axis("rdc").reset_index()

    # Sector x regulation matrix of adjusted distinct predictors.
    if len(df):
        mat = (
            df.groupby(["sector", "regulation"])["predictor_norm"].nunique().unstack(fill_value=0)
        )
        mat = mat.mul([scale(r) for r in mat.columns], axis=1)
        order_r = mat.sum(axis=1).sort_values(ascending=False).index
        order_c = mat.sum(axis=0).sort_values(ascending=False).index
        tables["sector_by_regulation"] = mat.loc[order_r, order_c]
    else:
        tables["sector_by_regulation"] = pd.DataFrame()

    # Sector share over time: per-year distinct features by sector,
    # excluding thin years; stacks sum to 1 per year.
    if len(df):
        per = df.groupby(["year", "sector"])["predictor_norm"].nunique().unstack(fill_value=0)
        raw_total = df.groupby("year")["predictor_norm"].nunique()
        keep = raw_total[raw_total >= MIN_RAW_ITEMS_PER_YEAR].index
        per = per.loc[per.index.intersection(keep)]
        shares = per.div(per.sum(axis=1), axis=0) if len(per) else per
        tables["sector_share_over_time"] = shares
    else:
        tables["sector_share_over_time"] = pd.DataFrame()

    # Scatter data: adjusted unique predictors vs adjusted unique DOIs per
    # regulation, with RDC diversity and reference year.
    rows = []
    for reg, g in df.groupby("regulation"):
        rows.append(
            {
                "regulation": reg,
                "adjusted_unique_predictors": g["predictor_norm"].nunique() * scale(reg),
                "adjusted_unique_dois": g["doi"].nunique() * scale(reg),
                "rdc_diversity": g["rdc"].nunique(),
                "reference_year": REFERENCE_YEARS.get(reg),
            }
        )
    tables["predictors_vs_dois"] = pd.DataFrame(
        rows, columns=["regulation", "adjusted_unique_predictors",
                       "adjusted_unique_dois", "rdc_diversity", "reference_year"]
    )

    # RDC composition per regulation, apportioned so stacked heights equal
    # the adjusted per-regulation distinct totals.
    if len(df):
        comp = (
            df.drop_duplicates(["regulation", "predictor_norm"])
            .groupby(["regulation", "rdc"]).size().unstack(fill_value=0)
        )
        totals = {
            reg: g["predictor_norm"].nunique() * scale(reg)
            for reg, g in df.groupby("regulation")
        }
        raw_tot = comp.sum(axis=1)
        comp = comp.mul(
            [totals[r] / raw_tot[r] if raw_tot[r] else 0.0 for r in comp.index], axis=0
        )
        tables["rdc_by_regulation"] = comp
        # Sankey edge list regulation -> RDC with adjusted distinct weights.
        edges = comp.stack().rename("adjusted_weight").reset_index()
        tables["sankey_edges"] = edges[edges["adjusted_weight"] > 0].reset_index(drop=True)
    else:
        tables["rdc_by_regulation"] = pd.DataFrame()
        tables["sankey_edges"] = pd.DataFrame(columns=["regulation", "rdc", "adjusted_weight"])

    # Pearson correlation of regulation profiles over sector-level distinct
    # counts, with an average-linkage cluster order on 1 - r distance.
    if len(df) and df["regulation"].nunique() >= 2:
        prof = (
            df.groupby(["regulation", "sector"])["predictor_norm"].nunique().unstack(fill_value=0)
        )
        prof = prof.mul([scale(r) for r in prof.index], axis=0)
        corr = prof.T.corr(method="pearson")
        order = _cluster_order(corr)
        tables["regulation_correlation"] = corr.loc[order, order]
    else:
        tables["regulation_correlation"] = pd.DataFrame()

    return tables


def _cluster_order(corr: pd.DataFrame) -> list:
    from scipy.cluster.hierarchy import average, leaves_list
    from scipy.spatial.distance import squareform

    dist = 1.0 - corr.to_numpy()
    np.fill_diagonal(dist, 0.0)
    dist = np.clip((dist + dist.T) / 2.0, 0.0, None)
    condensed = squareform(dist, checks=False)
    leaves = leaves_list(average(condensed))
    return [corr.index[i] for i in leaves]
