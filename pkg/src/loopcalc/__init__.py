"""Loop calculus for Forney-style graphical models."""
