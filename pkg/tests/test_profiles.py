import numpy as np
import pytest

from chim import ProfileError, builtin_profile, load_profile, single_tap_profile
from chim.profiles import TapProfile, format_profile, parse_profile


def test_builtin_shapes():
    assert builtin_profile("etu").num_taps == 9
    assert builtin_profile("eva").num_taps == 9
    assert builtin_profile("peda").num_taps == 4


def test_builtin_case_insensitive():
    assert builtin_profile("ETU").name == "etu"


def test_unknown_builtin():
    with pytest.raises(ProfileError, match="etu, eva, peda"):
        builtin_profile("tdl-a")


def test_normalized_powers_sum_to_one():
    for name in ("etu", "eva", "peda"):
        assert builtin_profile(name).normalized_linear_powers().sum() == pytest.approx(1.0)


def test_delays_start_at_zero_and_increase():
    for name in ("etu", "eva", "peda"):
        d = builtin_profile(name).delays()
        assert d[0] == 0.0
        assert np.all(np.diff(d) >= 0)


def test_parse_roundtrip(tmp_path):
    profile = builtin_profile("eva")
    path = tmp_path / "eva.profile"
    path.write_text(format_profile(profile))
    again = load_profile(path)
    assert again == profile


def test_parse_custom():
    profile = parse_profile("name two_ray\ntap 0 0\ntap 500 -3  # second ray\n")
    assert profile.name == "two_ray"
    assert profile.taps == ((0.0, 0.0), (500e-9, -3.0))


@pytest.mark.parametrize(
    "text,match",
    [
        ("tap 0 0\n", "missing 'name'"),
        ("name x\n", "no taps"),
        ("name x\ntap 10 0\n", "first tap delay"),
        ("name x\ntap 0 0\ntap 5 0\ntap 3 0\n", "non-decreasing"),
        ("name x\ntap 0 zero\n", "bad tap numbers"),
        ("name x\nbogus line\n", "unrecognized"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ProfileError, match=match):
        parse_profile(text)


def test_invariant_validation():
    with pytest.raises(ProfileError):
        TapProfile(name="bad", taps=((0.0, float("inf")),))


def test_single_tap_profile():
    p = single_tap_profile(power_db=-3.0)
    assert p.num_taps == 1
    assert p.normalized_linear_powers()[0] == 1.0
