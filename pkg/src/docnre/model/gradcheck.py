"""Finite-difference verification of the analytic gradients.

Central differences approximate d(loss)/d(theta) one parameter element at
a time; the analytic gradient from backward() must agree. Run this on
64-bit models with tiny dimensions only: cost is two forward passes per
parameter element.
"""
from __future__ import annotations

from dataclasses import dataclass

import torch

from docnre.errors import DataError
from docnre.model.batching import DocumentBatch
from docnre.model.network import RelationClassifier
from docnre.model.training import document_loss

# Relative error uses max(|analytic|, |numeric|, floor) as denominator; the
# floor turns the measure into a scaled absolute error for near-zero
# gradients (e.g. embedding rows of tokens absent from the document), which
# would otherwise divide noise by noise.
DENOMINATOR_FLOOR = 1e-3


@dataclass
class GradCheckResult:
    max_relative_error: float
    per_parameter: dict[str, float]

    def worst(self) -> str:
        return max(self.per_parameter, key=lambda k: self.per_parameter[k])


def grad_check(
    model: RelationClassifier,
    batch: DocumentBatch,
    epsilon: float = 1e-5,
    floor: float = DENOMINATOR_FLOOR,
) -> GradCheckResult:
    if model.config.dtype != torch.float64:
        raise DataError("gradient checking requires a float64 model")
    torch.set_num_threads(1)

    model.zero_grad()
    loss = document_loss(model, batch)
    loss.backward()
    analytic = {
        name: (p.grad.clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in model.named_parameters()
    }

    per_parameter: dict[str, float] = {}
    with torch.no_grad():
        for name, param in model.named_parameters():
            flat = param.view(-1)
            worst = 0.0
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + epsilon
                up = float(document_loss(model, batch))
                flat[i] = original - epsilon
                down = float(document_loss(model, batch))
                flat[i] = original
                numeric = (up - down) / (2.0 * epsilon)
                a = float(analytic[name].view(-1)[i])
                rel = abs(a - numeric) / max(abs(a), abs(numeric), floor)
                worst = max(worst, rel)
            per_parameter[name] = worst
    model.zero_grad()
    return GradCheckResult(
        max_relative_error=max(per_parameter.values()), per_parameter=per_parameter
    )
