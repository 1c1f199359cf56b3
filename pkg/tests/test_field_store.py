"""
Tests for field dumps.

Validates:
- Save and load keep coefficients bit-for-bit
- The JSON header
- Corrupt and missing dumps
"""

import json

import numpy as np
import pytest

from hnls.errors import FieldError
from hnls.numerics.spectral_core import make_grid, random_smooth_field
from hnls.storage import load_field, save_field


@pytest.fixture
def field_2d():
    return random_smooth_field(make_grid(2, 16, 5.0), seed=3, decay=3.0)


class TestFieldStore:
    """Test suite for the binary field format."""

    def test_roundtrip(self, tmp_path, field_2d):
        save_field(str(tmp_path), "u", field_2d)
        back = load_field(str(tmp_path), "u")
        assert back.grid == field_2d.grid
        assert back.space == "physical"
        np.testing.assert_allclose(back.physical(), field_2d.physical(), atol=1e-14)

    def test_payload_is_the_coefficients(self, tmp_path, field_2d):
        save_field(str(tmp_path), "u", field_2d)
        pairs = np.frombuffer((tmp_path / "u.bin").read_bytes(), dtype="<f8")
        coeffs = field_2d.fourier().ravel()
        np.testing.assert_array_equal(pairs[0::2], coeffs.real)
        np.testing.assert_array_equal(pairs[1::2], coeffs.imag)

    def test_header(self, tmp_path, field_2d):
        header = save_field(str(tmp_path), "u", field_2d)
        on_disk = json.loads((tmp_path / "u.json").read_text())
        assert on_disk == header
        assert on_disk["dim"] == 2 and on_disk["n"] == 16 and on_disk["box"] == 5.0
        assert on_disk["space"] == "fourier"
        assert (tmp_path / "u.bin").stat().st_size == 16 * 16 * 16

    def test_real_tag_survives(self, tmp_path):
        u = random_smooth_field(make_grid(1, 32, 4.0), seed=1, decay=3.0, real=True)
        save_field(str(tmp_path), "r", u)
        assert load_field(str(tmp_path), "r").real

    def test_checksum_mismatch(self, tmp_path, field_2d):
        save_field(str(tmp_path), "u", field_2d)
        path = tmp_path / "u.bin"
        data = bytearray(path.read_bytes())
        data[0] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(FieldError, match="checksum"):
            load_field(str(tmp_path), "u")

    def test_truncated_payload(self, tmp_path, field_2d):
        save_field(str(tmp_path), "u", field_2d)
        path = tmp_path / "u.bin"
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(FieldError, match="expected"):
            load_field(str(tmp_path), "u")

    def test_missing(self, tmp_path):
        with pytest.raises(FieldError, match="cannot read"):
            load_field(str(tmp_path), "absent")
