"""advtext: embedding-level adversarial attacks and adversarial training
for an LSTM sentiment classifier, with LM-based quality scoring and
heatmap reports of discretized adversarial sequences."""

__version__ = "0.1.0"
