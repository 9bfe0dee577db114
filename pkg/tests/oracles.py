"""Independent reference answers for the corpus models."""

import itertools
import re

from thingc.things import Symbol

ACCEPTOR = re.compile(r"01+0")
PERIOD = 165
PHASES = (("E1_red", 0, 50), ("E3_green", 50, 150), ("E5_yellow", 150, 165))


def binary_strings(lengths):
    for n in lengths:
        for bits in itertools.product((0, 1), repeat=n):
            yield list(bits)


def acceptor_verdict(bits):
    return "accepted" if ACCEPTOR.fullmatch("".join(map(str, bits))) else "rejected"


def palindrome_verdict(bits):
    return "accepted" if bits == bits[::-1] else "rejected"


def thermostat_outputs(stream, heating=False):
    out = []
    for t in stream:
        if not heating and t <= 18:
            heating = True
            out.append(Symbol("heatOn"))
        elif heating and t >= 22:
            heating = False
            out.append(Symbol("heatOff"))
    return out


def light_state(t):
    phase = t % PERIOD
    return {name for name, lo, hi in PHASES if lo <= phase < hi}
