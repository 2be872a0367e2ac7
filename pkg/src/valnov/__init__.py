"""Argument validity/novelty prediction pipeline.

Corpus handling, a trainable reference text encoder, multi-task and
contrastive training, few-shot LLM prompting with a replay cache, a
TF-IDF/SVM baseline, heterogeneous prediction mixing, and evaluation
with error analysis. Runnable at desk scale on one CPU core.
"""

__version__ = "0.1.0"
