INT_KEYS = ("d", "h", "precision_bits", "rho_iterations", "max_discriminant")


def parse_field_config(path):
    """Parses a key=value field configuration file (``config/*.data``)"""
    options = dict()
    options['precision_bits'] = '128'
    options['rho_iterations'] = '1000000'
    options['max_discriminant'] = '10000000'
    with open(path, 'r') as fp:
        lines = fp.readlines()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if line == '' or line.startswith('#'):
            continue
        if '=' not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = line.split('=', 1)
        options[key.strip()] = value.strip()
    for key in INT_KEYS:
        if key in options:
            try:
                options[key] = int(options[key])
            except ValueError:
                raise ValueError(f"{path}: {key} must be an integer, got {options[key]!r}")
    return options
