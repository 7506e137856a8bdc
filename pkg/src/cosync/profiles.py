"""Link parameter profiles.

A profile carries one ``LinkModel`` per link class plus per-obstacle
attenuations, in the same [section] key=value syntax as scenario files.
Profiles resolve by file path, or by bare name against the ``profiles/``
directory shipped inside the package (``paper-v1`` lives there).
"""

import os
from dataclasses import dataclass, field
from importlib import resources

from .channel import LinkModel
from .errors import ConfigError, InvalidInputError

_LINK_FIELDS = ("tx_power_dbm", "path_loss_exponent", "reference_loss_db",
                "noise_floor_dbm", "snr_threshold_db", "loss_steepness",
                "bitrate_bps", "propagation_speed_mps", "processing_delay_s",
                "queue_service_rate_pps")


@dataclass(frozen=True)
class Profile:
    name: str
    links: dict
    obstacle_attenuation: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.links:
            raise InvalidInputError("profile %r defines no links" % (self.name,))


def parse_profile(text, source="<profile>"):
    name = None
    links = {}
    attenuation = {}
    current = None            # ("profile",) | ("link", class) | ("obstacles",)
    link_kv = {}
    current_line = 0

    def finish_link():
        if current is not None and current[0] == "link":
            try:
                links[current[1]] = LinkModel(**link_kv)
            except (InvalidInputError, TypeError) as exc:
                raise ConfigError("link %r: %s" % (current[1], exc),
                                  source=source, line=current_line)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header",
                                  source=source, line=lineno)
            parts = line[1:-1].split()
            finish_link()
            link_kv = {}
            current_line = lineno
            if parts == ["profile"]:
                current = ("profile",)
            elif parts == ["obstacles"]:
                current = ("obstacles",)
            elif len(parts) == 2 and parts[0] == "link":
                current = ("link", parts[1])
            else:
                raise ConfigError("unknown section %r" % (line,),
                                  source=source, line=lineno)
            continue
        if "=" not in line or current is None:
            raise ConfigError("expected 'key = value' inside a [section]",
                              source=source, line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if current[0] == "profile":
            if key != "name":
                raise ConfigError("unknown key in [profile]", source=source,
                                  line=lineno, field=key)
            name = value
        elif current[0] == "obstacles":
            try:
                attenuation[key] = float(value)
            except ValueError:
                raise ConfigError("bad attenuation %r" % (value,),
                                  source=source, line=lineno, field=key)
        else:
            if key not in _LINK_FIELDS:
                raise ConfigError("unknown link field", source=source,
                                  line=lineno, field=key)
            try:
                link_kv[key] = float(value)
            except ValueError:
                raise ConfigError("bad number %r" % (value,),
                                  source=source, line=lineno, field=key)
    finish_link()
    if name is None:
        raise ConfigError("profile has no [profile] name", source=source)
    if not links:
        raise ConfigError("profile defines no [link ...] sections", source=source)
    return Profile(name=name, links=links, obstacle_attenuation=attenuation)


def emit_profile(profile):
    lines = ["[profile]", "name = %s" % profile.name]
    for key in sorted(profile.links):
        model = profile.links[key]
        lines.append("")
        lines.append("[link %s]" % key)
        for fname in _LINK_FIELDS:
            lines.append("%s = %r" % (fname, getattr(model, fname)))
    if profile.obstacle_attenuation:
        lines.append("")
        lines.append("[obstacles]")
        for key in sorted(profile.obstacle_attenuation):
            lines.append("%s = %r" % (key, profile.obstacle_attenuation[key]))
    return "\n".join(lines) + "\n"


def load_profile(name_or_path):
    """Load a profile by file path or by bundled name."""
    text = None
    source = str(name_or_path)
    if os.sep in source or source.endswith(".profile") and os.path.exists(source):
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    else:
        record = resources.files("cosync").joinpath("profiles",
                                                    source + ".profile")
        try:
            text = record.read_text(encoding="utf-8")
        except (FileNotFoundError, ModuleNotFoundError):
            raise ConfigError("no bundled profile named %r" % (source,),
                              source=source)
        source = "%s.profile" % name_or_path
    return parse_profile(text, source=source)
