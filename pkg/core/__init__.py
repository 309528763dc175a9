# oodp_desk/core/__init__.py
# 'core' paketi
