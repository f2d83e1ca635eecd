"""CSV ingestion, validation and the strength consistency-band filter.

Input schemas:
    edges.csv  -> firm_id,bank_id,amount
    firms.csv  -> firm_id,s_bal,total_assets,leverage,roa,tangibility
    banks.csv  -> bank_id,t_bal,total_assets,leverage,roa

Duplicate (firm, bank) edge rows are summed into a single weight.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .core import BankAttributes, BipartiteNetwork, FirmAttributes, Sample, \
    derived_strengths

__all__ = [
    "IngestError",
    "MalformedRow",
    "MissingAttribute",
    "NegativeAmount",
    "DuplicateAttributeRow",
    "FilterReport",
    "parse_sample",
    "apply_consistency_filter",
    "write_sample_csv",
]

CONSISTENCY_BAND = (1e-3, 1e3)


class IngestError(ValueError):
    """Base class for ingestion failures."""


class MalformedRow(IngestError):
    def __init__(self, path, line_no, detail=""):
        self.path, self.line_no = path, line_no
        super().__init__(f"{path}:{line_no}: malformed row ({detail})")


class NegativeAmount(IngestError):
    def __init__(self, path, line_no):
        self.path, self.line_no = path, line_no
        super().__init__(f"{path}:{line_no}: negative loan amount")


class MissingAttribute(IngestError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"no attribute record for node {node_id!r}")


class DuplicateAttributeRow(IngestError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"duplicate attribute row for node {node_id!r}")


@dataclass(frozen=True)
class FilterReport:
    """Outcome of the consistency-band filter on firms."""

    kept_firms: int
    dropped_firms: tuple[tuple[str, float | None, str], ...]
    band: tuple[float, float]
    isolated_banks: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "kept_firms": self.kept_firms,
            "dropped_firms": [
                {"firm_id": fid, "ratio": ratio, "reason": reason}
                for fid, ratio, reason in self.dropped_firms
            ],
            "band": {"lower": self.band[0], "upper": self.band[1]},
            "isolated_banks": list(self.isolated_banks),
        }


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(path, 1, "empty file") from None
        if [h.strip() for h in header] != expected_header:
            raise MalformedRow(path, 1, f"expected header {','.join(expected_header)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected_header):
                raise MalformedRow(path, line_no, f"expected {len(expected_header)} fields")
            yield line_no, [cell.strip() for cell in row]


def _parse_float(path, line_no, text):
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(path, line_no, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(path, line_no, f"non-finite value: {text!r}")
    return value


def parse_sample(edges_path, firm_attrs_path, bank_attrs_path, label="") -> Sample:
    """Assemble a validated :class:`Sample` from the three CSV files."""
    firm_attrs: dict[str, FirmAttributes] = {}
    for line_no, row in _read_rows(
        firm_attrs_path,
        ["firm_id", "s_bal", "total_assets", "leverage", "roa", "tangibility"],
    ):
        fid = row[0]
        if not fid:
            raise MalformedRow(firm_attrs_path, line_no, "empty firm_id")
        if fid in firm_attrs:
            raise DuplicateAttributeRow(fid)
        vals = [_parse_float(firm_attrs_path, line_no, v) for v in row[1:]]
        try:
            firm_attrs[fid] = FirmAttributes(*vals)
        except ValueError as exc:
            raise MalformedRow(firm_attrs_path, line_no, str(exc)) from None

    bank_attrs: dict[str, BankAttributes] = {}
    for line_no, row in _read_rows(
        bank_attrs_path, ["bank_id", "t_bal", "total_assets", "leverage", "roa"]
    ):
        bid = row[0]
        if not bid:
            raise MalformedRow(bank_attrs_path, line_no, "empty bank_id")
        if bid in bank_attrs:
            raise DuplicateAttributeRow(bid)
        vals = [_parse_float(bank_attrs_path, line_no, v) for v in row[1:]]
        try:
            bank_attrs[bid] = BankAttributes(*vals)
        except ValueError as exc:
            raise MalformedRow(bank_attrs_path, line_no, str(exc)) from None

    # Node ordering follows the attribute files, so parsing is deterministic.
    firm_ids = tuple(firm_attrs)
    bank_ids = tuple(bank_attrs)
    firm_pos = {f: i for i, f in enumerate(firm_ids)}
    bank_pos = {b: j for j, b in enumerate(bank_ids)}
    weights = np.zeros((len(firm_ids), len(bank_ids)))

    for line_no, row in _read_rows(edges_path, ["firm_id", "bank_id", "amount"]):
        fid, bid, amount_text = row
        if not fid or not bid:
            raise MalformedRow(edges_path, line_no, "empty node id")
        amount = _parse_float(edges_path, line_no, amount_text)
        if amount < 0:
            raise NegativeAmount(edges_path, line_no)
        if fid not in firm_pos:
            raise MissingAttribute(fid)
        if bid not in bank_pos:
            raise MissingAttribute(bid)
        weights[firm_pos[fid], bank_pos[bid]] += amount

    net = BipartiteNetwork(firm_ids, bank_ids, weights)
    return Sample(net, firm_attrs, bank_attrs, label=label)


def apply_consistency_filter(sample: Sample) -> tuple[Sample, FilterReport]:
    """Drop firms whose network/balance strength ratio leaves the band.

    Firms with an undefined ratio (zero reported debt but positive network
    strength) are dropped as well; firms with no debt and no links are kept.
    Banks left isolated by the removals stay in the sample but are flagged.
    """
    net = sample.network
    s_net, _ = derived_strengths(net)
    lower, upper = CONSISTENCY_BAND

    keep_mask = np.ones(net.n_firms, dtype=bool)
    dropped: list[tuple[str, float | None, str]] = []
    for i, fid in enumerate(net.firm_ids):
        s_bal = sample.firm_attrs[fid].balance_strength
        if s_bal == 0:
            if s_net[i] == 0:
                continue  # no debt, no links: consistent by convention
            keep_mask[i] = False
            dropped.append((fid, None, "undefined ratio"))
            continue
        ratio = float(s_net[i] / s_bal)
        if ratio < lower:
            keep_mask[i] = False
            dropped.append((fid, ratio, "missing data"))
        elif ratio > upper:
            keep_mask[i] = False
            dropped.append((fid, ratio, "inconsistent Nota Integrativa"))

    kept_ids = tuple(f for f, keep in zip(net.firm_ids, keep_mask) if keep)
    new_weights = net.weights[keep_mask, :]
    new_net = BipartiteNetwork(kept_ids, net.bank_ids, new_weights)
    new_sample = Sample(
        new_net,
        {f: sample.firm_attrs[f] for f in kept_ids},
        dict(sample.bank_attrs),
        label=sample.label,
    )
    isolated = tuple(
        b for b, deg in zip(net.bank_ids, (new_weights > 0).sum(axis=0)) if deg == 0
    )
    report = FilterReport(
        kept_firms=len(kept_ids),
        dropped_firms=tuple(dropped),
        band=CONSISTENCY_BAND,
        isolated_banks=isolated,
    )
    return new_sample, report


def write_sample_csv(sample: Sample, out_dir) -> dict[str, str]:
    """Write a sample back out in the exact schemas ``parse_sample`` reads."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "edges": os.path.join(out_dir, "edges.csv"),
        "firms": os.path.join(out_dir, "firms.csv"),
        "banks": os.path.join(out_dir, "banks.csv"),
    }
    net = sample.network
    with open(paths["edges"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["firm_id", "bank_id", "amount"])
        for i, fid in enumerate(net.firm_ids):
            for j, bid in enumerate(net.bank_ids):
                if net.weights[i, j] > 0:
                    writer.writerow([fid, bid, repr(float(net.weights[i, j]))])
    with open(paths["firms"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["firm_id", "s_bal", "total_assets", "leverage", "roa", "tangibility"])
        for fid in net.firm_ids:
            a = sample.firm_attrs[fid]
            writer.writerow([fid] + [repr(float(v)) for v in (
                a.balance_strength, a.total_assets, a.leverage, a.roa, a.tangibility)])
    with open(paths["banks"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bank_id", "t_bal", "total_assets", "leverage", "roa"])
        for bid in net.bank_ids:
            a = sample.bank_attrs[bid]
            writer.writerow([bid] + [repr(float(v)) for v in (
                a.balance_strength, a.total_assets, a.leverage, a.roa)])
    return paths
