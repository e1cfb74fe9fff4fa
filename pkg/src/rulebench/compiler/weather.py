"""Rule-based mapping from scene weather semantics to simulator parameters."""

from __future__ import annotations

from dataclasses import dataclass

from ..scene.doc import WEATHER_CONDITIONS


@dataclass(frozen=True)
class WeatherParams:
    precipitation: float  # 0..1
    fog_density: float  # 0..1
    sun_altitude_deg: float  # below 0 = night
    wetness: float  # 0..1
    visibility_m: float
    cloud_state: str
    precipitation_type: str


_WEATHER_TABLE: dict[str, WeatherParams] = {
    "sunny": WeatherParams(0.0, 0.0, 70.0, 0.0, 100000.0, "free", "dry"),
    "cloudy": WeatherParams(0.0, 0.0, 45.0, 0.0, 60000.0, "overcast", "dry"),
    "rain": WeatherParams(0.8, 0.0, 35.0, 0.8, 8000.0, "rainy", "rain"),
    "fog": WeatherParams(0.0, 0.7, 30.0, 0.1, 60.0, "overcast", "dry"),
    "snow": WeatherParams(0.7, 0.2, 25.0, 0.5, 1500.0, "overcast", "snow"),
    "clear_night": WeatherParams(0.0, 0.0, -15.0, 0.0, 100000.0, "free", "dry"),
    "rain_night": WeatherParams(0.8, 0.0, -15.0, 0.8, 6000.0, "rainy", "rain"),
    "fog_night": WeatherParams(0.0, 0.8, -15.0, 0.1, 40.0, "overcast", "dry"),
}

assert set(_WEATHER_TABLE) == set(WEATHER_CONDITIONS)


def map_weather(weather: str) -> WeatherParams:
    """Deterministic total mapping; unknown tokens never reach this point."""
    try:
        return _WEATHER_TABLE[weather]
    except KeyError:
        raise ValueError(f"weather {weather!r} is not in the mapping table") from None


def weather_table_size() -> int:
    return len(_WEATHER_TABLE)
