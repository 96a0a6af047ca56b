import pytest

from phaselab import VersionInfo, __version__, version_info


def test_package_version():
    assert str(version_info) == __version__
    assert VersionInfo.from_str(__version__) == version_info


@pytest.mark.parametrize("text", ["1.0.0rc1", "1.0.0b2.dev3", "2.10.0"])
def test_round_trip(text):
    assert str(VersionInfo.from_str(text)) == text


def test_ordering():
    versions = ["1.0.0a1", "1.0.0b1", "1.0.0rc1.dev1", "1.0.0rc1", "1.0.0", "1.0.1"]
    parsed = [VersionInfo.from_str(text) for text in versions]
    assert all(a < b for a, b in zip(parsed, parsed[1:]))


@pytest.mark.parametrize("text", ["1.0", "01.0.0", "1.0.0-final", ""])
def test_invalid(text):
    with pytest.raises(ValueError):
        VersionInfo.from_str(text)
