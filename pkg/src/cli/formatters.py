"""
Text and DOT renderings of command results.
"""

from typing import Optional, Sequence

from graphviz import Digraph

from core.ctmc import Generator, SteadyState
from core.lumping import Partition
from core.models import ModelEnv, classify
from core.security import AttackVerdict, LowViewReport, PsniVerdict
from core.semantics import DerivationGraph, Transition
from utils.color_schemes import ROOT_PEN_WIDTH, get_action_color_hex, get_block_color_hex


def edge_label(transition: Transition) -> str:
    return f"({transition.action}, {transition.rate})×{transition.multiplicity}"


def format_graph_text(g: DerivationGraph) -> str:
    labels = g.labels()
    lines = [f"states: {g.size}"]
    lines.extend(f"  {i}: {label}" for i, label in enumerate(labels))
    lines.append(f"transitions: {len(g.transitions)}")
    lines.extend(
        f"  {t.source} --{edge_label(t)}--> {t.target}" for t in g.transitions
    )
    return "\n".join(lines)


def format_graph_dot(g: DerivationGraph, env: ModelEnv,
                     partition: Optional[Partition] = None,
                     high_contrast: bool = False) -> str:
    """
    DOT source for a derivation graph.

    One node per state labelled by its term, one edge per transition
    record coloured by the action's security class. With a partition,
    nodes are filled by block.
    """
    dot = Digraph(name="derivation_graph")
    dot.attr(rankdir="LR")
    dot.attr("node", shape="box", style="rounded")
    for i, label in enumerate(g.labels()):
        attrs = {}
        if i == g.root:
            attrs["peripheries"] = "2"
            attrs["penwidth"] = ROOT_PEN_WIDTH
        if partition is not None:
            attrs["style"] = "rounded,filled"
            attrs["fillcolor"] = get_block_color_hex(partition.block_of[i])
            attrs["tooltip"] = f"block {partition.block_of[i]}"
        dot.node(str(i), label=label, **attrs)
    for t in g.transitions:
        color = get_action_color_hex(classify(env, t.action), high_contrast)
        dot.edge(str(t.source), str(t.target), label=edge_label(t), color=color, fontcolor=color)
    return dot.source


def format_generator_text(q: Generator, labels: Sequence[str]) -> str:
    lines = [f"states: {q.n}"]
    for i, label in enumerate(labels):
        row = [f"q({i},{j}) = {value}" for (s, j), value in sorted(q.off_diag.items()) if s == i]
        row.append(f"q({i},{i}) = {q.diag[i]}")
        lines.append(f"  {i}: {label}")
        lines.extend(f"      {entry}" for entry in row)
    return "\n".join(lines)


def format_steady_text(pi: SteadyState, labels: Sequence[str]) -> str:
    width = max((len(label) for label in labels), default=0)
    lines = [f"steady state ({pi.method} solver):"]
    lines.extend(
        f"  {i}: {label.ljust(width)}  {p:.12f}" for i, (label, p) in enumerate(zip(labels, pi.probs))
    )
    return "\n".join(lines)


def format_partition_text(partition: Partition, labels: Sequence[str],
                          ignored: Sequence[str]) -> str:
    lines = [f"ignored: {', '.join(sorted(ignored))}", f"blocks: {len(partition)}"]
    for b, block in enumerate(partition.blocks):
        members = ", ".join(f"{s}:{labels[s]}" for s in block)
        lines.append(f"  [{b}] {{{members}}}")
    return "\n".join(lines)


def format_verdict_text(verdict: PsniVerdict) -> str:
    status = "HOLDS" if verdict.holds else "FAIL"
    lines = [
        f"PSNI: {status} (method: {verdict.method.value}, states: {verdict.states}, "
        f"blocks: {verdict.partition.blocks})"
    ]
    if verdict.witness is not None:
        lines.append(f"witness: {verdict.witness}")
    lines.extend(f"  {d}" for d in verdict.diagnostics)
    return "\n".join(lines)


def format_report_text(report: LowViewReport) -> str:
    lines = [format_steady_text(report.hidden, report.hidden_labels).replace(
        "steady state", "hidden view steady state", 1)]
    lines.append(format_steady_text(report.restricted, report.restricted_labels).replace(
        "steady state", "restricted view steady state", 1))
    lines.append("low-equivalence classes:")
    for c in report.classes:
        hidden = ", ".join(report.hidden_labels[s] for s in c.hidden_states) or "-"
        restricted = ", ".join(report.restricted_labels[s] for s in c.restricted_states) or "-"
        mark = "=" if c.agrees else "!="
        lines.append(
            f"  hidden {{{hidden}}} {c.hidden_probability:.12f} {mark} "
            f"{c.restricted_probability:.12f} restricted {{{restricted}}}"
        )
    lines.append(f"low view {'independent of' if report.consistent else 'depends on'} high activity")
    return "\n".join(lines)


def format_attack_text(verdict: AttackVerdict) -> str:
    if verdict.holds:
        return f"attacker {verdict.attacker}: no derivative distinguished ({verdict.checked} checked)"
    return (
        f"attacker {verdict.attacker}: distinguishes state {verdict.failing_state} "
        f"({verdict.failing_label})"
    )