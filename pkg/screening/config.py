import json
from pathlib import Path

from screening.exceptions import ConfigurationError


def read_config(path, serializer_class, section):
    """Parse a JSON config file and validate it with ``serializer_class``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(section=section, errors=f'{path} is not valid JSON ({exc})') from exc
    return validate_config(data, serializer_class, section)


def validate_config(data, serializer_class, section):
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise ConfigurationError(section=section, errors=json.dumps(serializer.errors, sort_keys=True))
    return dict(serializer.validated_data)
