"""Built-in benchmark fixtures used by the self-test.

Two published layer-wise fine-tuning studies, kept as plain rank columns:
a 17-layer conformer transducer adapted cross-lingually (word error rate,
averaged over seven languages) scored by all three methods, and a 12-layer
self-supervised encoder probed for phoneme recognition (phone error rate)
scored by maximum evidence only.  The expected correlations are recomputed
from the rank columns; the reference p-values are the rounded published
ones and are only held to within a factor of two (the underlying p-value
convention is not documented).
"""

CONFORMER17_WER = (62.63, 53.49, 53.61, 47.75, 37.02, 48.71, 42.13, 32.32, 21.74,
                   22.56, 19.86, 21.71, 25.56, 19.23, 20.09, 18.87, 18.27)

# note: the published fine-tuning rank column transposes the layers with WER
# 47.75 and 48.71 relative to its own metric column; the ranks are kept verbatim
CONFORMER17_RANKS = {
    "ft":    (17, 15, 16, 14, 11, 13, 12, 10, 7, 8, 4, 6, 9, 3, 5, 2, 1),
    "tsne":  (17, 16, 15, 13, 14, 12, 5, 3, 1, 10, 4, 8, 7, 9, 11, 6, 2),
    "logme": (17, 10, 15, 13, 16, 12, 14, 6, 7, 9, 5, 11, 8, 4, 3, 2, 1),
    "swd":   (17, 11, 10, 14, 13, 16, 15, 8, 9, 4, 6, 12, 7, 5, 2, 3, 1),
}

CONFORMER17_EXPECTED_RHO = {"tsne": 0.696078, "logme": 0.870098, "swd": 0.808824}
CONFORMER17_REFERENCE_P = {"tsne": 1e-3, "logme": 6e-6, "swd": 7e-5}

SSL12_PER = (35.63, 29.61, 27.51, 25.43, 23.75, 18.83, 14.35, 10.86, 8.73, 7.40,
             29.84, 30.37)

SSL12_RANKS = {
    "ft":    (12, 9, 8, 7, 6, 5, 4, 3, 2, 1, 10, 11),
    "logme": (9, 10, 8, 7, 6, 5, 4, 2, 3, 1, 12, 11),
}

SSL12_EXPECTED_RHO = {"logme": 0.944056}
SSL12_REFERENCE_P = {"logme": 3e-6}
