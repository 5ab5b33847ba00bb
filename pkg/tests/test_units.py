"""Unit tests for fixed-point quantities and instance-relative time."""

from datetime import datetime
import unittest

from units import (
    ceil_div,
    format_milli,
    from_milli,
    hours_to_minutes,
    minutes_since,
    parse_timestamp,
    scale_milli,
    timestamp_at,
    to_milli,
)


class TestUnits(unittest.TestCase):
    """Test case for milli-unit arithmetic and timestamps."""

    def test_to_milli(self):
        """Decimal quantities become integers, rounding half up."""
        self.assertEqual(to_milli(1), 1000)
        self.assertEqual(to_milli('1.2345'), 1235)
        self.assertEqual(to_milli(0.1), 100)
        self.assertEqual(to_milli(-2.5), -2500)
        with self.assertRaises(TypeError):
            to_milli(True)
        with self.assertRaisesRegex(ValueError, 'finite'):
            to_milli(float('inf'))

    def test_from_and_format_milli(self):
        """Milli-units print with exactly three decimal places."""
        self.assertEqual(from_milli(1500), 1.5)
        self.assertEqual(format_milli(1500), '1.500')
        self.assertEqual(format_milli(7), '0.007')
        self.assertEqual(format_milli(-1500), '-1.500')
        self.assertEqual(format_milli(0), '0.000')

    def test_ceil_div(self):
        """Division rounds toward positive infinity."""
        self.assertEqual(ceil_div(7, 2), 4)
        self.assertEqual(ceil_div(8, 2), 4)
        self.assertEqual(ceil_div(0, 5), 0)
        self.assertEqual(ceil_div(-7, 2), -3)
        with self.assertRaisesRegex(ValueError, 'positive'):
            ceil_div(1, 0)

    def test_scale_and_hours(self):
        """Scaling rounds down and hours convert to whole minutes."""
        self.assertEqual(scale_milli(20000, 0.8), 16000)
        self.assertEqual(scale_milli(999, 0.5), 499)
        self.assertEqual(hours_to_minutes(11), 660)
        self.assertEqual(hours_to_minutes(0.5), 30)
        self.assertEqual(hours_to_minutes(10.0), 600)

    def test_timestamps(self):
        """Timestamps become whole minutes since the epoch and back."""
        epoch = datetime(2024, 1, 1)
        moment = parse_timestamp('2024-01-02T01:30:45')
        self.assertEqual(moment, datetime(2024, 1, 2, 1, 30))
        self.assertEqual(minutes_since(epoch, moment), 1530)
        self.assertEqual(timestamp_at(epoch, 1530), '2024-01-02T01:30:00')
        earlier = datetime(2023, 12, 31, 23, 0)
        self.assertEqual(minutes_since(epoch, earlier), -60)


if __name__ == '__main__':
    unittest.main()
