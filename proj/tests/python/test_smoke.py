import normtab


def test_import():
    assert normtab is not None
