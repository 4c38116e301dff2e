"""Power-sector technology transition simulator."""
