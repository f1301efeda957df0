#!/usr/bin/env python3
"""Send a text message through the complete simulated link.

The message is padded into an LDPC frame, the codeword is packed into grid
symbols (Gray-coded column and row), each symbol is transmitted as exactly
one photon detection sampled from the channel model, and the receiver
Gray-decodes, forms LLRs from the modeled raw BER, and runs belief
propagation.  Crosstalk flips hundreds of symbols per frame; the code
removes them all.

Run:  python demos/demo_full_link.py
"""

import numpy as np

from photonlink import (
    GrayMap,
    NoiseModel,
    PointSpread,
    grid_from_config,
    load_dvbs2_rate12,
    run_full_pipeline,
)

MESSAGE = (
    "A single photon can carry much more than one bit: "
    "this frame crossed a simulated 9072-symbol spatial channel."
)


def text_to_bits(text: str) -> np.ndarray:
    return np.unpackbits(np.frombuffer(text.encode(), dtype=np.uint8))


def bits_to_text(bits: np.ndarray) -> str:
    return np.packbits(bits).tobytes().decode(errors="replace")


def main():
    grid = grid_from_config(896, 648, 8)
    psf = PointSpread(8.0, 8.0)
    gmap = GrayMap(7, 7)
    code = load_dvbs2_rate12()
    message = text_to_bits(MESSAGE)
    print(f"message: {len(MESSAGE)} characters = {message.size} bits "
          f"(frame capacity {code.k} bits)")

    for ratio in (100.0, 10.07):
        print(f"\n--- signal-to-dark-count ratio {ratio:g} ---")
        decoded, diag = run_full_pipeline(
            message, grid, psf, NoiseModel(ratio), gmap, code, seed=2026
        )
        print(f"sent {diag['n_symbols_sent']} symbols "
              f"({diag['packing_bits_x']}+{diag['packing_bits_y']} bits each), "
              f"{diag['symbol_errors']} arrived at the wrong grid position")
        print(f"raw BER {diag['raw_ber']:.4f} (receiver modeled {diag['crossover_used']:.4f}), "
              f"decoder {'converged' if diag['converged'] else 'gave up'} "
              f"after {diag['iterations']} iterations")
        print(f"post-decoding BER: {diag['post_ber']:.2e}")
        if np.array_equal(decoded, message):
            print(f"recovered: \"{bits_to_text(decoded)[:60]}...\"")
        else:
            errs = int(np.sum(decoded != message))
            print(f"message NOT recovered ({errs} bit errors remain)")


if __name__ == "__main__":
    main()
