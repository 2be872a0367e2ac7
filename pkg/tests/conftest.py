import pytest

from valnov.corpus import ArgumentInstance, Confidence, Split


def make_instance(
    id="i0",
    topic="topic",
    premise="a premise",
    conclusion="a conclusion",
    validity=1,
    novelty=1,
    vconf=Confidence.UNKNOWN,
    nconf=Confidence.UNKNOWN,
    split=Split.TRAIN,
):
    return ArgumentInstance(
        id=id,
        topic=topic,
        premise=premise,
        conclusion=conclusion,
        validity_raw=validity,
        novelty_raw=novelty,
        validity_confidence=vconf,
        novelty_confidence=nconf,
        split=split,
    )


@pytest.fixture
def tiny_corpus():
    """Six instances, two topics, both labels present for both tasks."""
    rows = [
        ("a0", "guns", "p one", "c one", 1, 1),
        ("a1", "guns", "p one", "c two", 1, -1),
        ("a2", "guns", "p two", "c three", -1, 0),
        ("a3", "taxes", "p three", "c four", 0, 1),
        ("a4", "taxes", "p three", "c five", 1, -1),
        ("a5", "taxes", "p four", "c six", -1, 1),
    ]
    return [
        make_instance(id=i, topic=t, premise=p, conclusion=c, validity=v, novelty=n)
        for i, t, p, c, v, n in rows
    ]
