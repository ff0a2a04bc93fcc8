"""Monte-Carlo simulation studies."""
