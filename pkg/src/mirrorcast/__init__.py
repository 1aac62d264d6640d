"""mirrorcast: live website mirroring over enriched screenshots.

The server drives one headless browser per viewer session, streams each
render cycle as a screenshot plus interactive-element geometry, and replays
the viewer's input against the real page. Everything a session produces is
recorded for later reconstruction, and an audit harness classifies how well
a mirrored site's clickable elements survive the round trip.
"""

__version__ = "0.1.0"
