# oodp_desk/config/__init__.py
# 'config' paketi
