# oodp_desk/utils/__init__.py
# 'utils' paketi
