"""Single source of the package version for modules that stamp outputs."""

VERSION = "0.1.0"
