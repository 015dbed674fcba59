"""Good-or-odd certificates on random colourings and on extremal constructions.

Run: python demos/certificates.py
"""
from __future__ import annotations

from tripartite_trees import (
    Certificate,
    Colour,
    certify_good_or_odd,
    gen_pyramid,
    gen_random_colouring,
    gen_spider,
    pyramid_certificate,
    spider_certificate,
    validate_certificate,
)


def describe(label, cert):
    if not isinstance(cert, Certificate):
        print(f"{label}: inconclusive ({cert.reason})")
        return
    print(
        f"{label}: {cert.kind} in colour {cert.colour.code} via {cert.source}, "
        f"achieved {tuple(cert.achieved)} against {tuple(cert.thresholds)}"
    )


for seed in range(3):
    colouring = gen_random_colouring(12, 0.5, seed=seed)
    describe(f"random K_12,12,12 seed {seed}", certify_good_or_odd(colouring, 0.1))

host, witness = gen_pyramid(150, 0.01, "tunnel", Colour.GREEN, Colour.RED, seed=1)
cert = pyramid_certificate(host, witness, 0.05)
describe("pyramid (tunnel)", cert)
print("  independent check:", validate_certificate(host, cert) or "ok")

host, witness = gen_spider(150, 0.01, "small_core", seed=1)
cert = spider_certificate(host, witness, 0.05)
describe("spider (small core)", cert)
print("  independent check:", validate_certificate(host, cert) or "ok")
