"""Spatio-temporal coexistence checking for rule combinations.

A combination only enters the hierarchical rule set if its members can hold
in one physical place and time. Two oracle implementations share one
interface:

* ``TagCoexistenceOracle`` -- deterministic fallback used in CI: a
  combination is infeasible exactly when two members carry disjoint tag
  values inside the same *exclusive* namespace (``road:tunnel`` vs
  ``road:narrow_bridge``). Additive namespaces such as ``agent:`` or
  ``sign:`` never contradict: one scene can contain many agents and signs.
* ``ModelCoexistenceOracle`` -- asks a chat endpoint with the coexistence
  validation prompt and parses the leading 0/1 verdict.

``validate_coexistence`` wraps either oracle with the retry policy:
transport failures are retried then surfaced; an unparseable verdict is
retried and, once the budget is exhausted, recorded as infeasible with an
audit flag (never silently feasible).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Protocol, Sequence

from .. import prompts
from ..endpoints import ChatEndpoint, ChatRequest, EndpointError, first_binary_token
from ..rules import AtomicRule
from .combos import Coexistence, RuleCombo, _resolve

DEFAULT_EXCLUSIVE_NAMESPACES = frozenset(
    {"road", "weather", "time", "marking", "surface", "visibility", "zone"}
)

UNPARSEABLE_AUDIT_FLAG = "[unparseable-verdict]"


@dataclass(frozen=True)
class OracleReply:
    feasible: bool
    reasoning: str


class OracleVerdictError(RuntimeError):
    """The oracle answered, but no 0/1 verdict could be extracted."""


class CoexistenceOracle(Protocol):
    def check(self, rules: Sequence[AtomicRule]) -> OracleReply: ...


@dataclass
class TagCoexistenceOracle:
    exclusive_namespaces: frozenset[str] = DEFAULT_EXCLUSIVE_NAMESPACES

    def check(self, rules: Sequence[AtomicRule]) -> OracleReply:
        values: dict[str, list[tuple[str, set[str]]]] = {}
        for rule in rules:
            per_ns: dict[str, set[str]] = {}
            for tag in rule.context_tags:
                namespace, _, value = tag.partition(":")
                per_ns.setdefault(namespace, set()).add(value)
            for namespace, vals in per_ns.items():
                values.setdefault(namespace, []).append((rule.id, vals))

        for namespace in sorted(values):
            if namespace not in self.exclusive_namespaces:
                continue
            declared = values[namespace]
            for i in range(len(declared)):
                for j in range(i + 1, len(declared)):
                    id_a, vals_a = declared[i]
                    id_b, vals_b = declared[j]
                    if vals_a.isdisjoint(vals_b):
                        return OracleReply(
                            feasible=False,
                            reasoning=(
                                f"contradictory {namespace!r} tags: {id_a} declares "
                                f"{sorted(vals_a)} while {id_b} declares {sorted(vals_b)}"
                            ),
                        )
        return OracleReply(feasible=True, reasoning="no contradictory context tags")


@dataclass
class ModelCoexistenceOracle:
    endpoint: ChatEndpoint

    def check(self, rules: Sequence[AtomicRule]) -> OracleReply:
        prompt = prompts.render_coexistence_prompt([rule.content for rule in rules])
        request_id = "coexistence:" + "+".join(rule.id for rule in rules)
        text = self.endpoint.complete(ChatRequest(prompt=prompt, request_id=request_id))
        verdict = first_binary_token(text)
        if verdict is None:
            raise OracleVerdictError(f"no 0/1 verdict in oracle reply: {text[:120]!r}")
        return OracleReply(feasible=bool(verdict), reasoning=text.strip())


def validate_coexistence(
    combo: RuleCombo,
    rules: Mapping[str, AtomicRule] | Sequence[AtomicRule],
    oracle: CoexistenceOracle,
    *,
    retry_budget: int = 2,
) -> RuleCombo:
    """Set the combo's coexistence verdict from the oracle.

    Requires derived labels. Transport failures retry up to the budget and
    then propagate; unparseable verdicts retry and then default to
    infeasible with an audit flag in the reasoning note.
    """
    if combo.level is None:
        raise ValueError("derive labels before validating coexistence")
    members = _resolve(combo, rules)

    failure: Exception | None = None
    for _ in range(retry_budget + 1):
        try:
            reply = oracle.check(members)
        except (EndpointError, OracleVerdictError) as exc:
            failure = exc
            continue
        verdict = Coexistence.FEASIBLE if reply.feasible else Coexistence.INFEASIBLE
        return replace(combo, coexistence=verdict, coexistence_note=reply.reasoning)
    if isinstance(failure, EndpointError):
        raise failure
    return replace(
        combo,
        coexistence=Coexistence.INFEASIBLE,
        coexistence_note=f"{UNPARSEABLE_AUDIT_FLAG} oracle verdict unparseable after retries",
    )
